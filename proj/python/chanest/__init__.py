"""Quantized sparse MIMO channel estimation (Python bindings)."""

import numpy as np

from ._chanest import (
    ChanestError,
    QuantizerSpec,
    config_text,
    default_quantizer,
    dequantize,
    nmse_db,
    optimal_uniform_step,
    quantize,
    read_records,
    read_tensor,
    replay,
    run_experiment,
    summarize,
    write_tensor,
)

__all__ = [
    "ChanestError",
    "QuantizerSpec",
    "config_text",
    "default_quantizer",
    "dequantize",
    "load_tensor",
    "nmse_db",
    "optimal_uniform_step",
    "quantize",
    "read_records",
    "read_tensor",
    "replay",
    "run_experiment",
    "summarize",
    "write_tensor",
]


def load_tensor(path):
    """Read a tensor artifact as an array of shape dims (first axis fastest)."""
    data, dims = read_tensor(path)
    return np.asarray(data).reshape(tuple(dims), order="F")
