"""Multi-hop question answering over heterogeneous semantic-role graphs."""

from .data import QAInstance, Paragraph, SrlAnnotation, SrlFrame, parse_instance, parse_srl
from .graph import HeteroGraph, build_graph
from .kernels import BACKEND as KERNEL_BACKEND
from .model import ModelParams
from .train import Dataset, Hyper, train

__all__ = [
    "QAInstance", "Paragraph", "SrlAnnotation", "SrlFrame", "parse_instance", "parse_srl",
    "HeteroGraph", "build_graph", "ModelParams", "Dataset", "Hyper", "train", "KERNEL_BACKEND",
]

__version__ = "0.1.0"
