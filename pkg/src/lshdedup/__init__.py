"""Near-duplicate text detection with MinHash LSH."""

__version__ = "0.1.0"

from .evaluation import (  # noqa: E402
    EvalReport,
    SweepCell,
    SweepGrid,
    compute_roc_auc,
    duplication_percentage,
    evaluate,
    score_documents,
    sweep,
)
from .lsh import (  # noqa: E402
    Cluster,
    DedupResult,
    DuplicatePair,
    LshIndex,
    LshParams,
    build_index,
    choose_bands,
    dedup_scan,
)
from .minhash import HashFamily, MinHashSignature, estimate_jaccard, exact_jaccard, make_family, sign  # noqa: E402
from .synth import LabeledCorpus, SynthConfig, build_donor_pool, perturb, synthesize  # noqa: E402
from .text import Document, SentenceList, ShingleSet, normalize, shingle, split_sentences  # noqa: E402

__all__ = [
    "Cluster",
    "DedupResult",
    "Document",
    "DuplicatePair",
    "EvalReport",
    "HashFamily",
    "LabeledCorpus",
    "LshIndex",
    "LshParams",
    "MinHashSignature",
    "SentenceList",
    "ShingleSet",
    "SweepCell",
    "SweepGrid",
    "SynthConfig",
    "build_donor_pool",
    "build_index",
    "choose_bands",
    "compute_roc_auc",
    "dedup_scan",
    "duplication_percentage",
    "estimate_jaccard",
    "evaluate",
    "exact_jaccard",
    "make_family",
    "normalize",
    "perturb",
    "score_documents",
    "shingle",
    "sign",
    "split_sentences",
    "sweep",
    "synthesize",
]
