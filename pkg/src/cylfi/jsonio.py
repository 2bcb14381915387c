"""JSON encodings. Complex numbers are always ``[re, im]`` pairs."""

from __future__ import annotations

import datetime as _dt
import json
import sys

import numpy as np

from .errors import ShapeError
from .model import BilinearForm, ModelSpace, Projection
from .moments import MomentFunctional
from .polytensor import SymTensor

TOOL_VERSION = "0.1.0"


def cx(z):
    z = complex(z)
    return [z.real, z.imag]


def from_cx(pair):
    if isinstance(pair, (int, float)):
        return complex(pair)
    if len(pair) != 2:
        raise ShapeError(f"complex numbers are [re, im] pairs, got {pair!r}")
    return complex(pair[0], pair[1])


def form_to_json(form):
    return {"dim": form.space.dim, "matrix": [[cx(z) for z in row] for row in form.matrix]}


def form_from_json(data):
    dim = int(data["dim"])
    mat = np.array([[from_cx(z) for z in row] for row in data["matrix"]], dtype=complex)
    return BilinearForm(ModelSpace(dim), mat)


def projection_to_json(proj):
    return {"dim": proj.space.dim, "rows": proj.matrix.tolist()}


def projection_from_json(data, space=None):
    space = space or ModelSpace(int(data["dim"]))
    if space.dim != int(data["dim"]):
        raise ShapeError(f"projection for dimension {data['dim']} on a {space.dim}-dimensional space")
    return Projection(space, np.array(data["rows"], dtype=float))


def tensor_to_json(t):
    return {
        "nvars": t.nvars,
        "rank": t.rank,
        "entries": [{"idx": list(idx), "val": cx(v)} for idx, v in sorted(t.entries.items())],
    }


def tensor_from_json(data, nvars=None):
    nvars = int(data.get("nvars", nvars))
    return SymTensor(nvars, int(data["rank"]), {tuple(e["idx"]): from_cx(e["val"]) for e in data["entries"]})


def functional_to_json(mu):
    return {
        "nvars": mu.nvars,
        "max_degree": mu.max_degree,
        "tensors": [{"rank": t.rank, "entries": tensor_to_json(t)["entries"]} for t in mu.tensors],
    }


def functional_from_json(data):
    n = int(data["nvars"])
    tensors = [tensor_from_json(t, n) for t in data["tensors"]]
    mu = MomentFunctional(n, tensors)
    if mu.max_degree != int(data["max_degree"]):
        raise ShapeError("max_degree disagrees with the number of tensors")
    return mu


def manifest(command, inputs, seed=None):
    return {
        "command": command,
        "inputs": inputs,
        "seed": seed,
        "tool_version": TOOL_VERSION,
        "python": sys.version.split()[0],
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True)
