from .checkpoint import load_checkpoint, save_checkpoint
from .layers import (ChannelStandardize, Conv2D, Linear, MaxPool2D, NumericalError, Param, ReLU, ShapeError,
                     collapse_vertical, collapse_vertical_backward)
from .model import (ConfigError, ImplicitLM, LMConfig, MCFCRN, ModelConfig, ctc_batch_loss, implicit_lm_forward,
                    mcfcrn_forward)
from .optim import SGD, AdaDelta, adadelta_step, add_weight_decay, clip_grad_norm, make_optimizer
from .recurrent import BLSTM, LSTM, BLSTMStack, ResidualBLSTM, ResidualStack
