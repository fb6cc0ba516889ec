"""Platform edge: signal ingestion, headless simulation, the HTTP session
service and batch analysis."""

from .clock import Clock, VirtualClock, WallClock
from .sources import ReplaySource, SimulatedSource, TcpSource, ingest
from .headless import run_headless, run_simulated_study
from .analysis import analyze_logs, analyze_paths
from .service import ServiceConfig, create_app

__all__ = [
    "ServiceConfig",
    "create_app",
    "Clock",
    "VirtualClock",
    "WallClock",
    "ReplaySource",
    "SimulatedSource",
    "TcpSource",
    "ingest",
    "run_headless",
    "run_simulated_study",
    "analyze_logs",
    "analyze_paths",
]
