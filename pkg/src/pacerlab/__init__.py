"""Heart-rate-coupled breathing-guide experiment platform.

Subpackages cover the full pipeline: inter-beat-interval processing and
RMSSD analytics (``biosignal``), the breathing-guide engine (``guide``),
a synthetic physiological subject (``subjectsim``), the N-back task
(``cogtask``), questionnaire scoring (``assess``), session orchestration
(``protocol``), permutation statistics (``stats``) and the network/CLI
edge (``gateway``).
"""

__version__ = "0.1.0"
