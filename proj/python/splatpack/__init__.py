# Copyright 2026 The splatpack Authors. All Rights Reserved.
# SPDX-License-Identifier: Apache-2.0

"""Compression codec for anchor-based 3D Gaussian splat scenes."""

import json as _json

from ._splatpack import (
    AnchorCloud,
    CodecProfile,
    ContextModelParams,
    EncodeResult,
    SplatpackError,
    decode,
    distortion,
    encode,
    fit,
    generate,
    initial_params,
    load_cloud,
    neighbor_feature_correlation,
    parse_cloud,
    prune,
    save_cloud,
    selftest,
    serialize_cloud,
    set_threads,
)
from ._splatpack import rate_report as _rate_report


def rate_report(data):
    """Per-section byte counts and estimated bits of an encoded stream, as a dict."""
    return _json.loads(_rate_report(data))


__all__ = [
    "AnchorCloud",
    "CodecProfile",
    "ContextModelParams",
    "EncodeResult",
    "SplatpackError",
    "decode",
    "distortion",
    "encode",
    "fit",
    "generate",
    "initial_params",
    "load_cloud",
    "neighbor_feature_correlation",
    "parse_cloud",
    "prune",
    "rate_report",
    "save_cloud",
    "selftest",
    "serialize_cloud",
    "set_threads",
]
