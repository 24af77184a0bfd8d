"""Mirror detection: fuzzy hashing, the hybrid workflow, baselines and the benchmark."""
from .baselines import minhash, minhash_sim, simhash, simhash_sim
from .bench import (CSV_COLUMNS, BenchRow, EmptyBenchmark, Method, bench_dedup, best_threshold, default_methods,
                    hybrid_method, minhash_method, rows_to_csv, simhash_method, threshold_sweep)
from .ctph import FuzzyHash, compare_digests, ctph_compare, ctph_hash
from .detect import (Branch, EmptyPage, MirrorClusterer, MirrorDetector, MirrorVerdict, MirrorWeights,
                     PageFingerprint, VerdictKind, cluster_mirrors, detect_mirror, fingerprint)

__all__ = [
    "minhash", "minhash_sim", "simhash", "simhash_sim", "CSV_COLUMNS", "BenchRow", "EmptyBenchmark", "Method",
    "bench_dedup", "best_threshold", "default_methods", "hybrid_method", "minhash_method", "rows_to_csv",
    "simhash_method", "threshold_sweep", "FuzzyHash", "compare_digests", "ctph_compare", "ctph_hash", "Branch",
    "EmptyPage", "MirrorClusterer", "MirrorDetector", "MirrorVerdict", "MirrorWeights", "PageFingerprint",
    "VerdictKind", "cluster_mirrors", "detect_mirror", "fingerprint",
]
