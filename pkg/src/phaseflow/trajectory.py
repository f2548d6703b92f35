"""Time series of vertex states with their obstacle terms and energies."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np


def _num(x):
    """JSON-safe float: ``repr`` round-trips exactly; infinities become null."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return None
    return x


@dataclass
class Trajectory:
    """Sampled trajectory ``t -> (u(t), beta(t))``.

    Attributes
    ----------
    times : ndarray, shape (T,)
        Strictly increasing sample times.
    states : ndarray, shape (T, n)
    betas : ndarray, shape (T, n)
        Obstacle term at each sample; the first row is NaN when no obstacle
        term is attached to the initial state.
    scheme_tag : str
        Which solver produced it, e.g. ``"semi-discrete"``, ``"regularized"``.
    energies : list of dict, optional
        Per-sample diagnostics with keys ``H``, ``GL``, ``J``.
    fixed_point : bool
        Whether the run stopped because a step reproduced its input.
    meta : dict
        Free-form parameters (``eps``, ``tau``, ``nu``...).
    """

    times: np.ndarray
    states: np.ndarray
    betas: np.ndarray
    scheme_tag: str
    energies: list | None = None
    fixed_point: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.betas = np.atleast_2d(np.asarray(self.betas, dtype=float))
        if self.states.shape[0] != self.times.shape[0] or self.betas.shape != self.states.shape:
            raise ValueError("times, states and betas must have matching lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def at(self, t: float) -> np.ndarray:
        """State at the sample time closest to ``t``."""
        return self.states[int(np.argmin(np.abs(self.times - t)))]

    def records(self) -> list:
        out = []
        for k in range(len(self)):
            beta = self.betas[k]
            rec = {
                "n": k,
                "t": _num(self.times[k]),
                "u": [_num(x) for x in self.states[k]],
                "beta": None if np.all(np.isnan(beta)) else [_num(x) for x in beta],
            }
            if self.energies is not None:
                e = self.energies[k]
                rec.update({"H": _num(e["H"]), "GL": _num(e["GL"]), "J": _num(e["J"])})
            out.append(rec)
        return out

    def to_json(self, provenance: dict | None = None) -> str:
        doc = {
            "provenance": provenance or {},
            "scheme_tag": self.scheme_tag,
            "meta": self.meta,
            "fixed_point": self.fixed_point,
            "trajectory": self.records(),
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["n", "t", "vertex", "u", "beta"]
        if self.energies is not None:
            header += ["H", "GL", "J"]
        writer.writerow(header)
        for rec in self.records():
            for i, ui in enumerate(rec["u"]):
                row = [rec["n"], repr(rec["t"]), i, repr(ui),
                       "" if rec["beta"] is None else repr(rec["beta"][i])]
                if self.energies is not None:
                    row += [repr(rec["H"]), repr(rec["GL"]), repr(rec["J"])]
                writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        doc = json.loads(text)
        recs = doc["trajectory"]
        n = len(recs[0]["u"])
        nan = [math.nan] * n

        def _f(xs):
            return [math.inf if x is None else x for x in xs]

        energies = None
        if recs and "H" in recs[0]:
            energies = [{k: (math.inf if r[k] is None else r[k]) for k in ("H", "GL", "J")} for r in recs]
        return cls(
            times=[r["t"] for r in recs],
            states=[_f(r["u"]) for r in recs],
            betas=[nan if r["beta"] is None else _f(r["beta"]) for r in recs],
            scheme_tag=doc["scheme_tag"],
            energies=energies,
            fixed_point=doc["fixed_point"],
            meta=doc.get("meta", {}),
        )
