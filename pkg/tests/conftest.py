import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from risopt.dipoles import DipoleSpec, SceneConfig, build_scene_matrix, zero_los
from risopt.errors import ValidityWarning
from risopt.pipeline import optimize_scene


@pytest.fixture(autouse=True)
def _quiet_validity_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        yield


@pytest.fixture(scope="session")
def default_scene():
    return SceneConfig()


@pytest.fixture(scope="session")
def default_network(default_scene):
    return zero_los(build_scene_matrix(default_scene))


@pytest.fixture(scope="session")
def default_result(default_scene, default_network):
    """The canonical design point, optimized once for the whole session."""
    return optimize_scene(default_scene, net=default_network)


def random_scene(rng, n_min=2, n_max=14):
    """Physically sane randomized scene: reciprocal, passive, non-overlapping.

    Element lengths sit above resonance so optimal loads land on the
    capacitive side, matching the tuning hardware's range."""
    freq = 3.55e9
    lam = 299792458.0 / freq
    layouts = [(1, 1), (1, 2), (1, 3), (2, 2), (1, 5), (2, 4), (2, 5), (2, 7), (3, 4)]
    usable = [rc for rc in layouts if n_min <= rc[0] * rc[1] <= n_max]
    rows, cols = usable[rng.integers(0, len(usable))]
    length = float(rng.uniform(0.50, 0.58) * lam)
    strip = float(rng.uniform(0.02, 0.06) * length)
    element = DipoleSpec(length=length, strip_width=strip)
    col_spacing = float(rng.uniform(1.15, 1.6) * length)
    row_spacing = float(rng.uniform(0.5, 0.8) * lam)
    beta = float(rng.uniform(-50, 0))
    alpha = float(rng.uniform(5, 60))
    return SceneConfig(
        frequency=freq,
        rows=rows,
        cols=cols,
        col_spacing=col_spacing,
        row_spacing=row_spacing,
        element=element,
        tx_angle_beta=beta,
        rx_angle_alpha=alpha,
        tx_distance=float(rng.uniform(1.5, 3.0)),
        rx_distance=float(rng.uniform(1.5, 3.0)),
    )


def random_passive_loads(rng, n):
    """Random passive terminations: mild series loss, broad reactance."""
    re = rng.uniform(0.0, 20.0, size=n)
    im = rng.uniform(-400.0, 400.0, size=n)
    return re + 1j * im
