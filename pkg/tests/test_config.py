import textwrap

import pytest

from concave_convex.config import ConfigError, load_config

BASE = """
[grid]
dimension = 1
half_width = 4.0
nodes_per_axis = 21

[potential]
kind = radial_power
exponent = 2.0

[nonlinearity]
kind = power
p = 4
q = 1.5
lambda_fraction = 0.5
"""


def write(tmp_path, text, name="c.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def test_load_defaults(tmp_path):
    cfg = load_config(write(tmp_path, BASE))
    assert cfg.params.grid.nodes_per_axis == 21
    assert cfg.params.lam == pytest.approx(0.5 * cfg.lambda_crit)
    assert cfg.box == "cone" and cfg.workers == 1
    assert cfg.output_dir == tmp_path / "out"
    assert cfg.header.startswith("config_sha256=")


def test_hash_ignores_comments_but_not_values(tmp_path):
    a = load_config(write(tmp_path, BASE, "a.ini"))
    b = load_config(write(tmp_path, "# a comment\n" + BASE, "b.ini"))
    c = load_config(write(tmp_path, BASE.replace("nodes_per_axis = 21", "nodes_per_axis = 23"), "c.ini"))
    assert a.digest == b.digest != c.digest


@pytest.mark.parametrize("mutate,match", [
    (lambda s: s.replace("nodes_per_axis = 21", "nodes_per_axis = 2x"), r":5: \[grid\] nodes_per_axis: expected int"),
    (lambda s: s.replace("exponent = 2.0", "exponent = 2.0\ncolour = red"), r"\[potential\] colour: unknown key"),
    (lambda s: s + "\n[extras]\na = 1\n", r"\[extras\]: unknown section"),
    (lambda s: s.replace("q = 1.5", "q = 2.5"), r"\[nonlinearity\] q: need 1 < q < 2"),
    (lambda s: s.replace("lambda_fraction = 0.5", "lambda_fraction = 0.5\nlambda = 0.1"), "exactly one"),
    (lambda s: s.replace("kind = power", "kind = sine"), "unknown nonlinearity kind"),
    (lambda s: s.replace("exponent = 2.0", "exponent = 2.0\ndimension = 2"), "inconsistent N"),
    (lambda s: s.replace("half_width = 4.0\n", ""), r"\[grid\] half_width: missing required key"),
])
def test_schema_errors(tmp_path, mutate, match):
    with pytest.raises(ConfigError, match=match):
        load_config(write(tmp_path, mutate(BASE)))


def test_integrability_violation_reported(tmp_path):
    text = BASE.replace("dimension = 1", "dimension = 2").replace("exponent = 2.0", "exponent = 1.5")
    cfg = load_config(write(tmp_path, text))
    # the potential is accepted at parse time; assembly enforces s > N
    from concave_convex.grid import build_grid
    from concave_convex.schrodinger_op import assemble

    with pytest.raises(ValueError, match="s > N"):
        assemble(build_grid(cfg.params.grid), cfg.params.potential)


def test_tabulated_potential_size_mismatch(tmp_path):
    (tmp_path / "V.txt").write_text("1\n2\n3\n")
    text = BASE.replace("kind = radial_power\nexponent = 2.0", "kind = tabulated\nfile = V.txt\nV0 = 1")
    with pytest.raises(ConfigError, match="inconsistent N or m"):
        load_config(write(tmp_path, text))


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("CONCAVE_CONVEX_WORKERS", "3")
    monkeypatch.setenv("CONCAVE_CONVEX_SEED", "17")
    cfg = load_config(write(tmp_path, BASE))
    assert cfg.workers == 3 and cfg.seed == 17
    assert "seed=17" in cfg.header


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(tmp_path / "nope.ini")


def test_odd_exp_uses_lambda1(tmp_path):
    text = (BASE.replace("dimension = 1", "dimension = 2").replace("exponent = 2.0", "exponent = 3.0")
            .replace("kind = power\np = 4", "kind = odd_exp\nalpha = 1\nbeta = 1.0\nnu = 2.0"))
    cfg = load_config(write(tmp_path, text))
    assert cfg.lambda_crit == pytest.approx(0.3849002, abs=1e-7)
