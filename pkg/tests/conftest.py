import numpy as np
import pytest

import sicancel as sc

# reference design point used throughout: two coupling paths at gains
# 0.2/0.17 with delays 10/12, amplifier gain 2500, half-symbol sampling
REF = dict(
    a=2500.0,
    paths=((0.2, 10), (0.17, 12)),
    f=10000.0,
    h=1.0,
    N=2,
    m=5,
    N_p=16,
    beta=0.1,
)

# printed coefficients of the reference band-limiting filter
REF_TAPS = np.array([
    0.0165, -0.0533, -0.0177, 0.0821, 0.0186, -0.1455, -0.0192, 0.4499,
    0.7287, 0.4499, -0.0192, -0.1455, 0.0186, 0.0821, -0.0177, -0.0533,
    0.0165,
])

SMALL = dict(
    a=3.0,
    paths=((0.4, 2),),
    f=0.13,
    h=1.0,
    N=2,
    m=2,
    N_p=4,
    beta=0.5,
)


def make_params(spec: dict, **overrides) -> sc.RelayParams:
    kw = dict(spec)
    kw.update(overrides)
    return sc.RelayParams(aa_filter=sc.first_order_lowpass(0.5, 2), **kw)


@pytest.fixture(scope="session")
def ref_params():
    return make_params(REF)


@pytest.fixture(scope="session")
def ref_pulse(ref_params):
    return sc.srrc_taps(ref_params.beta, ref_params.N, ref_params.N_p, ref_params.h)


@pytest.fixture(scope="session")
def ref_plant(ref_params, ref_pulse):
    return sc.build_generalized_plant(ref_params, ref_pulse)


@pytest.fixture(scope="session")
def ref_design(ref_plant):
    gamma, ctrl = sc.gamma_iterate(ref_plant, rel_tol=1e-3, epsilon=1e-4)
    return gamma, ctrl


@pytest.fixture(scope="session")
def ref_baseline(ref_params, ref_pulse):
    return sc.baseline_controller(ref_params, ref_pulse)


@pytest.fixture(scope="session")
def small_params():
    return make_params(SMALL)


@pytest.fixture(scope="session")
def small_pulse(small_params):
    p = small_params
    return sc.srrc_taps(p.beta, p.N, p.N_p, p.h)


@pytest.fixture(scope="session")
def small_plant(small_params, small_pulse):
    return sc.build_generalized_plant(small_params, small_pulse)


@pytest.fixture(scope="session")
def small_design(small_plant):
    gamma, ctrl = sc.gamma_iterate(small_plant, rel_tol=1e-3, epsilon=1e-4)
    return gamma, ctrl


CONFIG_TEXT = """\
output_dir = "out"

[relay]
a = 2500.0
f = 10000.0
h = 1.0
N = 2
m = 5
N_p = 16
beta = 0.1
paths = [[0.2, 10], [0.17, 12]]
filter_tau = 0.5

[ofdm]
num_blocks = 2
block_len = 64
guard_len = 16
seed = 0

[synthesis]
rel_tol = 1e-3
epsilon = 1e-4
"""


@pytest.fixture(scope="session")
def cli_workspace(tmp_path_factory, capsys=None):
    """Config file plus one completed design run (artifact + report)."""
    from sicancel.cli import main

    root = tmp_path_factory.mktemp("cli")
    cfg = root / "run.toml"
    cfg.write_text(CONFIG_TEXT)
    out = root / "design_out"
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        rc = main(["design", str(cfg), "--out-dir", str(out)])
    assert rc == 0, buf.getvalue()
    return {
        "root": root,
        "config": cfg,
        "out": out,
        "artifact": out / "controller.txt",
        "report": buf.getvalue(),
    }
