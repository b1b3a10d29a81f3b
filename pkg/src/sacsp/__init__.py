"""Jointly learned spatial and spectral filters for two-class multichannel epochs."""
from .algorithms import ALGORITHMS, FilterPair, SacspConfig, TrainedFilterBank, train, train_ccacsp, train_csp, train_sacsp
from .classify import LdaModel, SacspModel, extract_features, fit_model, lda_train, ledoit_wolf_covariance, predict
from .config import RunConfig, load_config
from .data import ContinuousRecording, Epoch, EpochSet, Marker
from .errors import SacspError
from .evaluation import EvalReport, SplitPlan, run_kfold, run_transfer, wilcoxon_signed_rank
from .preprocess import PreprocessConfig, bandpass_epochs, preprocess_recording
from .spectral import SpectralWeights, bin_power, build_train_stats, weighted_cov
from .synth import Source, SynthSpec, default_spec, generate, reference_recovery_score

__version__ = "0.1.0"
