# Copyright 2026 The qmem Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python interface to the qmem memory-error simulator.

Noise arguments accept a NoiseModel, a preset name, or a dict of
NoiseModel fields (optionally with a "preset" key to start from).
"""

import json as _json

from . import _qmem
from ._qmem import (
    BudgetError,
    ConfigError,
    FitError,
    NoiseModel,
    SchemaError,
    clifford_group_json,
    detuning_from_field,
    emit_figure_data,
    estimate_cost,
    fit_dataset,
    fit_decoherence_model,
    fit_rb_decay,
    mean_word_length,
    noise_preset,
    noise_preset_names,
    run_campaign,
    stretch_noise_model,
)

__version__ = _qmem.__version__


def noise(spec=None):
    """Builds a NoiseModel from None, a preset name, a dict or a NoiseModel."""
    if spec is None:
        return NoiseModel()
    if isinstance(spec, NoiseModel):
        return spec
    if isinstance(spec, str):
        return noise_preset(spec)
    if isinstance(spec, dict):
        fields = dict(spec)
        base = noise_preset(fields.pop("preset")) if "preset" in fields else NoiseModel()
        for key, value in fields.items():
            if not hasattr(base, key):
                raise ValueError(f"unknown noise field '{key}'")
            setattr(base, key, float(value))
        return base
    raise TypeError(f"cannot build a noise model from {type(spec).__name__}")


def predict_memory_error(noise_spec, tau, detail=False):
    n = noise(noise_spec)
    if detail:
        return _qmem.predict_memory_error_detail(n, tau)
    return _qmem.predict_memory_error(n, tau)


def run_ramsey(tau, shots=1000, noise_spec=None, seed=0, echo=False, eps_spam=0.0):
    return _qmem.run_ramsey(tau, shots, noise(noise_spec), seed, echo, eps_spam)


def run_spin_echo(tau, shots=1000, noise_spec=None, seed=0, eps_spam=0.0):
    return _qmem.run_ramsey(tau, shots, noise(noise_spec), seed, True, eps_spam)


def run_rb(m, k=50, tau=0.0, noise_spec=None, seed=0, shots=100, gateset="four-generator",
           dd_period=None, eps_inject=0.0, eps_spam=0.0):
    return _qmem.run_rb(m, k, tau, noise(noise_spec), seed, shots, gateset, dd_period, eps_inject, eps_spam)


def verify_manifest(path):
    """Checks every file checksum listed in a manifest and returns it as a dict."""
    return _json.loads(_qmem.verify_manifest(str(path)))


def selftest():
    """Runs the invariant suite; returns (exit_code, report)."""
    return _qmem.selftest()
