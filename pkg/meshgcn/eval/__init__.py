from .metrics import binary_metrics, rank_auc, roc_curve,\
    trapezoid_auc  # noqa
from .audit import subject_overlap, audit_splits  # noqa
from .mlp_baseline import mlp_baseline  # noqa
from .cv import TrialData, trial_datasets, train_gcn, evaluate_gcn,\
    monte_carlo_cv, summarize_trials, METRICS  # noqa
from .validation_suites import spectral_oracle_suite, gradient_suite,\
    hierarchy_suite, cam_suite, run_suites  # noqa
