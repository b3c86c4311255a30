"""Model files: JSON documents describing a discrete or a continuous source.

Discrete::

    {"outcomes": [[x], ...], "pmf": [...], "rewards": [[...], ...], "labels": [...]}

Continuous (discretized on a midpoint grid)::

    {"density": "beta(4,4)", "interval": [0, 1], "grid": 1000,
     "arms": ["gaussian_pdf(0.5,0.2,0.5)", "one_minus_exp(2.5)", "constant(0.5)"]}

An arm may also be ``{"table": {"x": [...], "y": [...]}}`` (piecewise linear).
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy import stats

from .errors import DimensionMismatch, ModelError
from .model import ContinuousSpec, LatentModel, OutcomeSpace, build_discrete, discretize

_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def _parse_call(text: str, field: str) -> tuple[str, list[float]]:
    m = _CALL.match(text)
    if not m:
        raise ModelError(f"{field}: cannot parse {text!r}")
    name, args = m.group(1), m.group(2)
    try:
        values = [float(a) for a in args.split(",")] if args and args.strip() else []
    except ValueError:
        raise ModelError(f"{field}: non-numeric argument in {text!r}") from None
    return name, values


def density_from_name(text: str, field: str = "density") -> Callable[[np.ndarray], np.ndarray]:
    name, args = _parse_call(text, field)
    if name == "beta":
        if len(args) != 2 or min(args) <= 0:
            raise ModelError(f"{field}: beta needs two positive shape parameters")
        dist = stats.beta(args[0], args[1])
        return dist.pdf
    if name == "uniform":
        if args:
            raise ModelError(f"{field}: uniform takes no parameters (use 'interval')")
        return lambda x: np.ones_like(np.asarray(x, dtype=float))
    raise ModelError(f"{field}: unknown density {name!r}")


def gaussian_pdf(mu: float, sigma: float, scale: float = 1.0) -> Callable:
    norm = scale / math.sqrt(2 * math.pi * sigma**2)
    return lambda x: norm * np.exp(-((np.asarray(x) - mu) ** 2) / (2 * sigma**2))


def one_minus_exp(rate: float) -> Callable:
    return lambda x: 1.0 - np.exp(-rate * np.asarray(x))


def constant(c: float) -> Callable:
    return lambda x: np.full(np.shape(x), float(c))


def reward_fn_from_spec(spec: Any, field: str) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(spec, dict):
        table = spec.get("table")
        if not isinstance(table, dict) or "x" not in table or "y" not in table:
            raise ModelError(f"{field}: table form needs {{'table': {{'x': [...], 'y': [...]}}}}")
        xs = np.asarray(table["x"], dtype=float)
        ys = np.asarray(table["y"], dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ModelError(f"{field}: table x must be increasing and match y in length")
        return lambda x: np.interp(x, xs, ys)
    if not isinstance(spec, str):
        raise ModelError(f"{field}: reward function must be a string or a table object")
    name, args = _parse_call(spec, field)
    forms = {"gaussian_pdf": (gaussian_pdf, (2, 3)), "one_minus_exp": (one_minus_exp, (1,)),
             "constant": (constant, (1,))}
    if name not in forms:
        raise ModelError(f"{field}: unknown reward form {name!r}")
    fn, arity = forms[name]
    if len(args) not in arity:
        raise ModelError(f"{field}: {name} takes {' or '.join(map(str, arity))} arguments")
    if name == "gaussian_pdf" and args[1] <= 0:
        raise ModelError(f"{field}: gaussian_pdf sigma must be positive")
    return fn(*args)


def model_from_dict(doc: dict, grid: int | None = None) -> LatentModel:
    if not isinstance(doc, dict):
        raise ModelError("model: top-level JSON value must be an object")
    if "density" in doc:
        return _continuous_from_dict(doc, grid)
    for key in ("outcomes", "pmf", "rewards"):
        if key not in doc:
            raise ModelError(f"{key}: missing required field")
    try:
        outcomes = np.asarray(doc["outcomes"], dtype=float)
    except (TypeError, ValueError):
        raise ModelError("outcomes: must be a list of numeric vectors") from None
    try:
        pmf = np.asarray(doc["pmf"], dtype=float)
    except (TypeError, ValueError):
        raise ModelError("pmf: must be a list of numbers") from None
    try:
        rewards = np.asarray(doc["rewards"], dtype=float)
    except (TypeError, ValueError):
        raise ModelError("rewards: must be a K x J numeric matrix") from None
    if rewards.ndim != 2:
        raise DimensionMismatch("rewards: must be a K x J numeric matrix")
    space = OutcomeSpace(outcomes, doc.get("labels"))
    return build_discrete(space, pmf, rewards, doc.get("reward_span"))


def _continuous_from_dict(doc: dict, grid: int | None) -> LatentModel:
    if not isinstance(doc.get("density"), str):
        raise ModelError("density: must be a named density string")
    arms = doc.get("arms")
    if not isinstance(arms, list) or not arms:
        raise ModelError("arms: must be a non-empty list of reward function forms")
    fns = [reward_fn_from_spec(a, f"arms[{i}]") for i, a in enumerate(arms)]
    interval = doc.get("interval", [0.0, 1.0])
    if not (isinstance(interval, list) and len(interval) == 2):
        raise ModelError("interval: must be a two-element list")
    n = grid if grid is not None else doc.get("grid", 1000)
    if not isinstance(n, int) or n < 2:
        raise ModelError("grid: must be an integer >= 2")
    spec = ContinuousSpec(
        density=density_from_name(doc["density"]),
        reward_fns=fns,
        grid_size=n,
        interval=(float(interval[0]), float(interval[1])),
    )
    return discretize(spec)


def load_model(path: str | Path, grid: int | None = None) -> LatentModel:
    """Read a model file.  Malformed content raises :class:`ModelError`."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(doc, grid)
