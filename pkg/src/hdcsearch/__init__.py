"""Runtime-parameterized hyperdimensional classification with architecture search."""

from .config import ArchConfig, SearchSpace
from .controller import Controller
from .data import LabeledCorpus, SplitSpec, load_csv, load_language_dirs, split, synthetic_corpus
from .encoder import HypervectorEncoder, ItemMemory, effective_gram, encode
from .estimator import HDCClassifier, TrainedModel, fit_model, load_model, save_model
from .hv import Accumulator, ElementType, EwiseOp, Hypervector, cast, ewise, generate_base_hv, rotate, rotation_amount, similarity
from .memory import AssociativeMemory, Prediction, accuracy, predict, retrain_epoch, roc_auc, train
from .metrics import roc_auc_score, softmax
from .search import EpisodeRecord, SearchResult, evaluate_reward, finalize, random_search, search_loop, tokenize_splits
from .tokenizer import Vocabulary, build_vocab, tokenize

__version__ = "0.1.0"

__all__ = [
    "Accumulator",
    "ArchConfig",
    "AssociativeMemory",
    "Controller",
    "ElementType",
    "EpisodeRecord",
    "EwiseOp",
    "HDCClassifier",
    "Hypervector",
    "HypervectorEncoder",
    "ItemMemory",
    "LabeledCorpus",
    "Prediction",
    "SearchResult",
    "SearchSpace",
    "SplitSpec",
    "TrainedModel",
    "Vocabulary",
    "accuracy",
    "build_vocab",
    "cast",
    "effective_gram",
    "encode",
    "evaluate_reward",
    "ewise",
    "finalize",
    "fit_model",
    "generate_base_hv",
    "load_csv",
    "load_language_dirs",
    "load_model",
    "predict",
    "random_search",
    "retrain_epoch",
    "roc_auc",
    "roc_auc_score",
    "rotate",
    "rotation_amount",
    "save_model",
    "search_loop",
    "similarity",
    "softmax",
    "split",
    "synthetic_corpus",
    "tokenize",
    "tokenize_splits",
    "train",
]
