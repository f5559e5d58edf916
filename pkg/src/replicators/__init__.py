"""Web cellular automata, additive percolation and replicator certificates.

The package is organised by subsystem:

* :mod:`replicators.additive` -- exact "1 Or 3" / "Xor" evolution, voids,
  predecessors, duality and GF(2) window ranks.
* :mod:`replicators.webca` -- 3-state range-2 web rules, compliance, 2D
  solidification rules and their two-level boundary dynamics.
* :mod:`replicators.percolation` -- path reachability, Z-paths, the chi-path,
  principal voids and Monte Carlo estimators.
* :mod:`replicators.replication` -- links, blockers, ethers, certificates.
* :mod:`replicators.census` -- exhaustive enumeration of link images.
* :mod:`replicators.cli` -- command line front end.
"""

__version__ = "0.1.0"
