"""Scenario files: schema validation and construction of the geometric inputs."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import liealg, orbits, symspace
from .errors import InputError, UsageError

KNOWN_CHECKS = ("curvature", "focal_profile", "transport", "equifocal", "reconstruction",
                "focal_preservation", "rank_additivity")
# checks that need the tube (and therefore the polar group)
TUBE_CHECKS = ("equifocal", "reconstruction", "rank_additivity")

DEFAULT_SAMPLING = {"seed": 0, "curves": 12, "group": 20, "loops": 2, "max_length": 2.0,
                    "hat_g_curves": 10, "hat_g_loops": 5, "reference": 200, "probes": 20,
                    "transport_vectors": 3}


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    pair: dict
    action: dict
    base_orbit: dict
    xi: dict | None
    sampling: dict
    checks: tuple
    expect: dict = field(default_factory=dict)
    rank_additivity: tuple = ()
    source: str = ""


def builtin_names() -> list[str]:
    root = resources.files("equifocal") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read_builtin(name: str) -> dict:
    path = resources.files("equifocal") / "scenarios" / f"{name}.json"
    if not path.is_file():
        raise UsageError(f"unknown scenario {name!r}; built-in: {', '.join(builtin_names())}")
    return json.loads(path.read_text())


def load_scenario(ref) -> Scenario:
    """Load a scenario from a dict, a JSON path or a built-in name."""
    if isinstance(ref, dict):
        data, source = ref, "<dict>"
    else:
        p = Path(ref)
        if p.suffix == ".json" or p.exists():
            if not p.is_file():
                raise UsageError(f"scenario file {ref} not found")
            try:
                data = json.loads(p.read_text())
            except json.JSONDecodeError as exc:
                raise UsageError(f"{ref}: invalid JSON ({exc})") from None
            source = str(p)
        else:
            data, source = _read_builtin(str(ref)), f"builtin:{ref}"
    return validate(data, source)


def _need(data: dict, key: str, kind):
    if key not in data:
        raise UsageError(f"scenario is missing {key!r}")
    if not isinstance(data[key], kind):
        raise UsageError(f"scenario field {key!r} has the wrong type")
    return data[key]


def validate(data: dict, source: str = "") -> Scenario:
    if not isinstance(data, dict):
        raise UsageError("scenario must be a JSON object")
    name = _need(data, "name", str)
    pair = _need(data, "pair", dict)
    action = _need(data, "action", dict)
    checks = _need(data, "checks", list)
    bad = [c for c in checks if c not in KNOWN_CHECKS]
    if bad:
        raise UsageError(f"unknown checks {bad}; known: {list(KNOWN_CHECKS)}")
    if "germ" not in pair and "algebra" not in pair:
        raise UsageError("pair needs 'germ' or 'algebra' + 'involution'")
    if "algebra" in pair and "involution" not in pair:
        raise UsageError("pair with 'algebra' needs 'involution'")
    if action.get("kind") not in ("hermann", "srep"):
        raise UsageError("action.kind must be 'hermann' or 'srep'")
    if action["kind"] == "srep" and "z0" not in action:
        raise UsageError("s-rep action needs z0")
    if action["kind"] == "hermann" and "subalgebra" not in action:
        raise UsageError("hermann action needs a subalgebra")
    xi = data.get("xi")
    needs_xi = any(c in TUBE_CHECKS + ("focal_preservation",) for c in checks)
    if needs_xi and xi is None:
        raise UsageError("tube checks need an xi entry")
    if xi is not None and not ("coefficients" in xi or "indices" in xi):
        raise UsageError("xi needs 'coefficients' or 'indices'")
    sampling = dict(DEFAULT_SAMPLING)
    sampling.update(data.get("sampling", {}))
    for k, v in sampling.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise UsageError(f"sampling.{k} must be a number")
    expect = data.get("expect", {})
    if not isinstance(expect, dict):
        raise UsageError("expect must be an object of 'check.key': value")
    for k in expect:
        if k.split(".")[0] not in checks:
            raise UsageError(f"expectation {k!r} refers to a check that is not run")
    ra = tuple(data.get("rank_additivity", ()))
    if "rank_additivity" in checks and not ra:
        raise UsageError("rank_additivity check needs a list of normal vectors")
    return Scenario(name, data.get("description", ""), pair, action, data.get("base_orbit", {}), xi,
                    sampling, tuple(checks), expect, ra, source)


# -- construction ---------------------------------------------------------------------


def build_ambient(sc: Scenario) -> symspace.SymmetricSpaceGerm:
    try:
        if "germ" in sc.pair:
            return symspace.named_germ(sc.pair["germ"])
        alg = sc.pair["algebra"]
        kind, _, n = alg.partition("(")
        if kind not in ("su", "so") or not n.endswith(")"):
            raise UsageError(f"unsupported algebra {alg!r}")
        model = liealg.su(int(n[:-1])) if kind == "su" else liealg.so(int(n[:-1]))
        return symspace.germ_from_model(model, sc.pair["involution"], alg)
    except InputError as exc:
        raise UsageError(str(exc)) from None


def labelled_vector(amb: symspace.SymmetricSpaceGerm, coeffs: dict) -> np.ndarray:
    """Adapted coordinates of a combination of parent-basis elements given by label."""
    model = amb.pair.parent
    labels = list(model.basis_labels)
    v = np.zeros(model.dim)
    for lab, c in coeffs.items():
        if lab not in labels:
            raise UsageError(f"unknown basis label {lab!r}")
        v[labels.index(lab)] = float(c)
    return amb.pair.to_adapted(v)


def _p_part(amb, coeffs, what: str) -> np.ndarray:
    v = labelled_vector(amb, coeffs)
    if float(np.linalg.norm(v[: amb.dim_k])) > 1e-9:
        raise UsageError(f"{what} must lie in p")
    return v[amb.dim_k:]


def build_orbit(sc: Scenario, amb: symspace.SymmetricSpaceGerm) -> orbits.OrbitGerm:
    act = sc.action
    try:
        if act["kind"] == "srep":
            return orbits.srep_orbit_germ(amb, _p_part(amb, act["z0"], "z0"), label=sc.name)
        sub = act["subalgebra"]
        if sub == "isotropy":
            alg = amb.k_embed
        elif isinstance(sub, dict) and "involution" in sub:
            alg = sub["involution"]
        elif isinstance(sub, dict) and "labels" in sub:
            alg = np.stack([labelled_vector(amb, {lab: 1.0}) for lab in sub["labels"]], axis=1)
        else:
            raise UsageError("subalgebra must be 'isotropy', {'involution': ...} or {'labels': [...]}")
        offset = _p_part(amb, sc.base_orbit.get("offset", {}), "base-orbit offset")
        return orbits.hermann_orbit_germ(amb, alg, offset, label=sc.name)
    except InputError as exc:
        raise UsageError(str(exc)) from None


def normal_coefficients(spec: dict, codim: int) -> np.ndarray:
    """``{'coefficients': [...]}`` or ``{'indices': [...], 'weights': [...], 'radius': r}``."""
    if "coefficients" in spec:
        c = np.asarray(spec["coefficients"], float)
        if c.shape != (codim,):
            raise UsageError(f"xi has {c.size} coefficients, codimension is {codim}")
        if "radius" in spec:
            c = float(spec["radius"]) * c / np.linalg.norm(c)
        return c
    idx = list(spec["indices"])
    if any(not 0 <= int(i) < codim for i in idx):
        raise UsageError(f"xi index out of range for codimension {codim}")
    w = np.asarray(spec.get("weights", [1.0] * len(idx)), float)
    if w.shape != (len(idx),):
        raise UsageError("xi weights must match indices")
    c = np.zeros(codim)
    c[idx] = w
    return float(spec.get("radius", 1.0)) * c / np.linalg.norm(c)
