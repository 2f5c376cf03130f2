"""Shared fixtures: the reference experiment configuration used throughout.

Radio and compute constants follow the standard evaluation setup; the
downlink rate is the free-space value at 50 m with a 1 W base station
(frozen constant, regenerate with scripts/golden_oracles.py). It is held
fixed during sweeps: the downlink is a scalar input, not a modeled channel.
"""
import math

import pytest

from edgesplit import (
    PathLossParams,
    StageDistribution,
    SystemParams,
    build_alexnet_preset,
    build_autoencoder_preset,
    mean_snr_from_pathloss,
)

DOWNLINK_BPS = 26900450.249632121
ANTENNA_GAIN = 4.11
CARRIER_HZ = 915e6
PATHLOSS_EXPONENT = 3.0

# frozen via scripts/golden_oracles.py
MEAN_SNR_D50 = 0.58398635357342641


def make_params(updates_per_model=50.0, beta_t=0.5, beta_e=0.5):
    return SystemParams(
        tx_power_w=0.1,
        noise_w=1e-10,
        bandwidth_hz=2e6,
        local_freq_hz=1e8,
        edge_freq_hz=1e10,
        kappa=1e-26,
        beta_t=beta_t,
        beta_e=beta_e,
        updates_per_model=updates_per_model,
        downlink_rate_bps=DOWNLINK_BPS,
    )


def pathloss_at(distance_m):
    return PathLossParams(
        antenna_gain=ANTENNA_GAIN,
        carrier_hz=CARRIER_HZ,
        distance_m=distance_m,
        exponent=PATHLOSS_EXPONENT,
    )


def channel_at(distance_m, params, floor_ratio=1e-3):
    mean = mean_snr_from_pathloss(pathloss_at(distance_m), params)
    return StageDistribution.truncated_exponential(mean, floor_ratio=floor_ratio)


@pytest.fixture(scope="session")
def params():
    return make_params()


@pytest.fixture(scope="session")
def params_inf_updates():
    return make_params(updates_per_model=math.inf)


@pytest.fixture(scope="session")
def autoencoder():
    return build_autoencoder_preset(DOWNLINK_BPS)


@pytest.fixture(scope="session")
def alexnet():
    return build_alexnet_preset(DOWNLINK_BPS)


@pytest.fixture(scope="session")
def dist_d50(params):
    return channel_at(50.0, params)


def reference_config_dict(**overrides):
    cfg = {
        "network": "autoencoder",
        "params": {
            "tx_power_w": 0.1,
            "noise_w": 1e-10,
            "bandwidth_hz": 2e6,
            "local_freq_hz": 1e8,
            "edge_freq_hz": 1e10,
            "kappa": 1e-26,
            "beta_t": 0.5,
            "beta_e": 0.5,
            "updates_per_model": 50,
            "downlink_rate_bps": DOWNLINK_BPS,
        },
        "channel": {
            "kind": "pathloss_rayleigh",
            "distance_m": 50,
            "antenna_gain": ANTENNA_GAIN,
            "carrier_hz": CARRIER_HZ,
            "exponent": PATHLOSS_EXPONENT,
            "snr_floor_ratio": 1e-3,
        },
        "strategies": ["optimal_exhaustive", "one_sla_exhaustive", "hybrid"],
        "trials": 20000,
        "seed": 42,
    }
    cfg.update(overrides)
    return cfg
