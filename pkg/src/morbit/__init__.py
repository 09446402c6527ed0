"""Mean orbital pseudo-metric, periodic-orbit density witnesses and average shadowing.

Modules:
    dynsys        state spaces, maps, orbits, empirical measures
    transport     exact/float assignment, min-cost flow, 1-D closed forms
    pseudometric  finite-horizon E-bar and Besicovitch estimators, snapshots
    periodic      periodic-orbit enumeration and bounded witness searches
    shadowing     block pseudo-orbits, tracing costs, transfer checks
    decomp        periodic decompositions and T^k -> T lifting
    cli           ``morbit`` experiment runner
"""

__version__ = "0.1.0"
