from .cheb_conv import cheb_basis, cheb_conv_forward, cheb_conv_backward,\
    ChebConvFunction, ChebConv  # noqa
from .layers import GraphBatchNorm, graph_max_pool, GraphMaxPool  # noqa
from .res_block import ResBlock  # noqa
from .residual_gcn import ResidualGCN, level_laplacians, count_parameters,\
    predict_proba, NUM_CLASSES  # noqa
from .loss import bce_loss, softmax_bce_loss, EPS_CLIP  # noqa
from .train import TrainResult, train, make_optimizer,\
    check_finite_gradients, evaluate_loss_accuracy  # noqa
from .gradcheck import GradCheckReport, finite_difference_check,\
    kink_margin, sample_off_kink  # noqa
from .checkpoint import save_checkpoint, load_checkpoint,\
    model_from_checkpoint  # noqa
from .mlp import MLPClassifier, mlp_parameter_count, gcn_conv_layers,\
    mlp_for_parameter_budget  # noqa
