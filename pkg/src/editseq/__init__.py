"""Learn edit sequence patterns from fine-grained code edit traces and use
them to predict the next edit."""
from .ast import AstNode, deserialize, serialize
from .estimator import EditSequencePredictor
from .minilang import parse, unparse
from .pipeline import Config, mine
from .rankpredict import classify, evaluate, predict
from .template import Esp, EditTemplate, match_sequence
from .trace import Trace, load_corpus, load_trace

__version__ = "0.1.0"

__all__ = [
    "AstNode",
    "Config",
    "EditSequencePredictor",
    "EditTemplate",
    "Esp",
    "Trace",
    "classify",
    "deserialize",
    "evaluate",
    "load_corpus",
    "load_trace",
    "match_sequence",
    "mine",
    "parse",
    "predict",
    "serialize",
    "unparse",
]
