"""Re-identifying Bitcoin users by address clustering, and scoring the result."""

__version__ = "0.1.0"

from .ledger import Ledger, Transaction, TxInput, TxOutput, first_seen, parse_ledger, validate  # noqa: E402
from .partition import Partition, UnionFind  # noqa: E402
from .identity import cluster_h1, cluster_with_change, detect_change_h2, detect_change_h3  # noqa: E402
from .hintnet import HintGraph, build_hint_graph  # noqa: E402
from .community import Dendrogram, WeightedGraph, louvain, modularity, project_level  # noqa: E402
from .metrics import anmi, nmi, pair_counts, precision_recall_f1  # noqa: E402
from .evalkit import EvalRow, GroundTruth, align, evaluate  # noqa: E402
from .simgen import SimConfig, generate  # noqa: E402
