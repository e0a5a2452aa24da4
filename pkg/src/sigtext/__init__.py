"""Path-signature features, multi-context FCRN recognition and CTC tooling for online handwriting."""
from .ctc import Alphabet
from .sigcore import Signature, chen_concat, inverse_check, path_signature, segment_signature
from .trajfeat import Trajectory, WindowConfig, rasterize, window_features

__version__ = "0.1.0"
