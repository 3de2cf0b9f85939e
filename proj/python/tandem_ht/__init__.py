"""Python access to the tandem heavy-traffic laboratory."""

import json as _json

from ._core import (
    ConfigError,
    LimitCdf,
    NumericalError,
    ServiceDistribution,
    __version__,
    _run,
    kinds,
    pareto_laplace,
    schedule,
    simulate,
    solve_kappa,
    solve_m,
    tail_constant,
)


def run(config, out_dir=None, **overrides):
    """Run an experiment described by a dict (or JSON text).

    Keyword overrides replace top-level fields, e.g. ``run(cfg, seed=3)``.
    Returns ``(report, tables)``: the report as a dict and each table as a
    dict of numpy columns.
    """
    if isinstance(config, str):
        config = _json.loads(config)
    doc = dict(config)
    doc.update(overrides)
    text, tables = _run(_json.dumps(doc), out_dir or "")
    return _json.loads(text), tables


__all__ = [
    "ConfigError",
    "LimitCdf",
    "NumericalError",
    "ServiceDistribution",
    "__version__",
    "kinds",
    "pareto_laplace",
    "run",
    "schedule",
    "simulate",
    "solve_kappa",
    "solve_m",
    "tail_constant",
]
