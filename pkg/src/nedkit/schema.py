"""Frozen column orders shared by extraction, pairing and checkpoints."""

FEATURE_COLUMNS = tuple(
    ["f0", "energy", "d_f0", "d_energy"]
    + [f"mfcc{i}" for i in range(1, 16)]
    + [f"mfb{i}" for i in range(1, 9)]
    + [f"lsf{i}" for i in range(1, 9)]
    + ["jitter_local", "jitter_ddp", "shimmer_local"]
)
N_FEATURES = len(FEATURE_COLUMNS)  # 38

FUNCTIONALS = ("mean", "median", "std", "p1", "p99", "range")
N_FUNCTIONALS = len(FUNCTIONALS)

# functional-major: element index = functional_index * N_FEATURES + feature_index
TURN_VECTOR_DIM = N_FEATURES * N_FUNCTIONALS  # 228

TURN_VECTOR_NAMES = tuple(f"{func}:{feat}" for func in FUNCTIONALS for feat in FEATURE_COLUMNS)
