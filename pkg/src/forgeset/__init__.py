"""forgeset: worst-case and easiest-case forget-set selection for machine
unlearning, an unlearning-method catalog, and an evaluation harness.

The selection scores live on a budgeted box constraint and are optimized
by alternating projected gradient steps with sign-descent unlearning
runs; brute-force oracles back every numeric claim at desk scale.
"""

from .blo import BLOConfig, Direction, Granularity, LowerInit, SelectionResult, ig_probe, lower_signsgd, select, upper_gradient
from .data import Dataset, ForgetMask, GroupLabels, Split, gen_biased, gen_blobs, load_csv, mask_from_weights, save_csv
from .errors import ForgesetError
from .kernels import BACKEND
from .metrics import EvalReport, GapReport, accuracy, avg_gap, class_entropy, compute_mia, compute_ua, evaluate
from .models import (
    Activation,
    ModelParams,
    Scope,
    forward,
    init_params,
    load_checkpoint,
    loss_and_grad,
    per_sample_loss,
    save_checkpoint,
)
from .numcore import RngStream, bisect_root, sign
from .oracle import enumerate_worst, qp_project_oracle
from .projection import SelectionWeights, clamp01, project_capped_simplex
from .unlearn import Method, UnlearnConfig, finetune, gradient_ascent_mu, l1_sparse, random_label, retrain, train

__version__ = "0.1.0"
