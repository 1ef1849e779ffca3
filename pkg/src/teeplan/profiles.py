"""Bundled synthetic benchmark profiles.

These are not measurements.  Layer times are fabricated so that the
aggregate behaviour of each profile (where the output resolution crosses
the privacy threshold relative to cumulative enclave time, enclave/
accelerator speed ratios, transfer sizes) lands in realistic territory for
a 224x224 classifier served from two enclave hosts over a 30 Mbps link.

Names accepted anywhere a profile or resource path is expected:

* ``alexnet-like``   - threshold crossed after ~19% of enclave time
* ``googlenet-like`` - threshold crossed after ~80% of enclave time
* ``toy``            - five layers on two enclaves, for quick starts
"""

from __future__ import annotations

from importlib import resources

from .fileio import load_profile, load_resources
from .model import NetworkProfile, ResourceGraph

BUILTIN_NAMES = ("alexnet-like", "googlenet-like", "toy")

_STEMS = {
    "alexnet-like": "synthetic_alexnet_like",
    "googlenet-like": "synthetic_googlenet_like",
    "toy": "toy",
}


def builtin_path(name: str, role: str) -> str:
    """Filesystem path of a bundled document; ``role`` is profile|resources."""
    if name not in _STEMS:
        raise KeyError(f"unknown builtin {name!r}; available: {', '.join(BUILTIN_NAMES)}")
    if role not in ("profile", "resources"):
        raise KeyError(f"role must be 'profile' or 'resources', got {role!r}")
    return str(resources.files("teeplan").joinpath(f"data/{_STEMS[name]}_{role}.json"))


def load_builtin(name: str) -> tuple[NetworkProfile, ResourceGraph]:
    return (
        load_profile(builtin_path(name, "profile")),
        load_resources(builtin_path(name, "resources")),
    )
