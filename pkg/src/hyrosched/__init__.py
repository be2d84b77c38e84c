"""hyrosched: scheduling toolkit for hybrid RF-optical IoT networks.

Subpackages and modules:

- :mod:`hyrosched.channel` — RF and optical link physics.
- :mod:`hyrosched.scenario` — reproducible network instances and serialization.
- :mod:`hyrosched.milp` — exact scheduling (model, solver, oracle, checker).
- :mod:`hyrosched.replay` — schedule simulation and AoI/energy metrics.
- :mod:`hyrosched.graphio` — graph snapshot datasets and label codecs.
- :mod:`hyrosched.repair` — feasibility repair of predicted schedules.
- :mod:`hyrosched.cli` — command-line front end.
"""

__version__ = "0.1.0"
