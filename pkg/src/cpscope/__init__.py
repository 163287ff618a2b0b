"""Instrumented finite-domain constraint solving with a search-tree debugger.

The package separates the solving core (domains, store, propagators,
resources), the programmed-search engine that builds the explicit tree,
the monitoring layer that turns runs into statistics and trace files,
and the client/server debugging session on top of the wire protocol.
"""

from .alldifferent import FilterLevel, post_alldifferent
from .domain import Domain
from .events import EventKind, PropagationEvent
from .search import Engine, NodeState, SearchStrategy
from .store import Constraint, Outcome, Store, VarRef
from .trace import SearchMonitor, TraceWriter, load_trace, run_engine

__version__ = "0.1.0"

__all__ = [
    "Constraint",
    "Domain",
    "Engine",
    "EventKind",
    "FilterLevel",
    "NodeState",
    "Outcome",
    "PropagationEvent",
    "SearchMonitor",
    "SearchStrategy",
    "Store",
    "TraceWriter",
    "VarRef",
    "load_trace",
    "post_alldifferent",
    "run_engine",
    "__version__",
]
