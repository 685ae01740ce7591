import math
from pathlib import Path

import pytest

from gflattice.config import NoiseChoice, RunEngine, load_config, parse_config, serialize, with_seed
from gflattice.errors import ValidationError
from gflattice.master import CorrelationMode, DephasingSchedule

CONFIGS = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.ini"))

FIG1A = """
[lattice]
sites = 40
c1 = 1
alpha = 0.5

[run]
engine = unitary
z_max = 8*pi
initial_site = 0
"""


def test_fig1a_parses_and_round_trips():
    cfg = parse_config(FIG1A)
    assert cfg.lattice.num_sites == 40 and cfg.lattice.ramp_alpha == 0.5
    assert cfg.run.engine is RunEngine.UNITARY and cfg.run.t_max == pytest.approx(8 * math.pi)
    assert cfg.run.initial_sites == (0,)
    assert parse_config(serialize(cfg)) == cfg


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_round_trip(path):
    cfg = load_config(str(path))
    assert parse_config(serialize(cfg)) == cfg


@pytest.mark.parametrize("text,expected", [
    ("3*pi/2", 1.5 * math.pi), ("pi", math.pi), ("-pi", -math.pi), ("2pi", 2 * math.pi), ("0.25", 0.25),
])
def test_pi_expressions(text, expected):
    cfg = parse_config(FIG1A.replace("8*pi", text)) if expected > 0 else None
    if cfg is not None:
        assert cfg.run.t_max == pytest.approx(expected)
    else:
        with pytest.raises(ValidationError, match="run.t_max"):
            parse_config(FIG1A.replace("8*pi", text))


@pytest.mark.parametrize("patch,key", [
    ("dt = -0.1", "run.dt"),
    ("dt = zero", "run.dt"),
    ("initial_site = 40", "run.initial_site"),
    ("speed = 3", "run.speed"),
    ("engine = magic", "run.engine"),
])
def test_errors_name_the_key(patch, key):
    text = FIG1A + patch + "\n"
    if patch.startswith(("initial_site", "engine")):
        name = patch.split(" ")[0]
        text = "\n".join(l for l in FIG1A.splitlines() if not l.startswith(name)) + "\n" + patch + "\n"
    with pytest.raises(ValidationError, match=key.replace(".", r"\.")):
        parse_config(text)


def test_missing_required_key_lists_defaults():
    with pytest.raises(ValidationError) as err:
        parse_config("[lattice]\nc1 = 1\n[run]\nengine = unitary\nz_max = 1\n")
    assert "lattice.sites" in str(err.value) and "lattice.alpha" in str(err.value)
    with pytest.raises(ValidationError, match=r"\[run\]"):
        parse_config("[lattice]\nsites = 4\n")
    with pytest.raises(ValidationError, match="unknown section"):
        parse_config(FIG1A + "[extras]\nx = 1\n")


def test_trajectories_reject_power_law_noise():
    text = FIG1A.replace("unitary", "trajectories") + "[noise]\nkind = pln\ngamma = 1\nlambda = 10\n"
    with pytest.raises(ValidationError, match="pln"):
        parse_config(text)


def test_noise_semantics():
    cfg = parse_config(FIG1A + "[noise]\nkind = white\ngamma = 0.2\ncorrelation = uncorrelated\n")
    assert cfg.noise.kind is NoiseChoice.WHITE and cfg.noise.correlation is CorrelationMode.UNCORRELATED
    # white intensity 0.2 damps <a> at 0.1
    assert cfg.noise.decay_schedule() == DephasingSchedule.constant(0.1)
    ou = parse_config(FIG1A + "[noise]\nkind = ou\ngamma = 2\nlambda = 0.5\n").noise
    assert ou.decay_schedule() == DephasingSchedule.oun(2.0, 0.5)
    assert ou.noise_model().stationary_variance == pytest.approx(0.5)


def test_scan_section_rules():
    scan = FIG1A.replace("engine = unitary", "engine = scan") + (
        "[noise]\nkind = ou\nlambda = 0.1\n[scan]\nengine = closed-form\nfrom = 0.1\nto = 10\n")
    with pytest.raises(ValidationError, match="closed-form"):
        parse_config(scan)
    cfg = parse_config(scan.replace("closed-form", "moment-ode"))
    assert cfg.scan.values()[0] == pytest.approx(0.1) and cfg.scan.values()[-1] == pytest.approx(10)
    with pytest.raises(ValidationError, match="scan"):
        parse_config(FIG1A.replace("engine = unitary", "engine = scan"))


def test_seed_override():
    cfg = with_seed(parse_config(FIG1A), 2**64 - 1)
    assert cfg.run.seed == 2**64 - 1
    with pytest.raises(ValidationError):
        with_seed(cfg, -1)
