import json
import math

import numpy as np
import pytest

from phaseflow.trajectory import Trajectory


def sample():
    times = [0.0, 0.1, 0.2]
    states = [[0.1, 0.9], [0.2, 0.8], [1 / 3, 2 / 3]]
    betas = [[math.nan, math.nan], [0.0, 0.0], [0.5, -0.5]]
    energies = [{"H": 0.1, "GL": math.inf, "J": 0.05}] * 3
    return Trajectory(times, states, betas, "semi-discrete", energies, True, {"tau": 0.1})


def test_validation():
    with pytest.raises(ValueError, match="increasing"):
        Trajectory([0, 0], [[0], [1]], [[0], [0]], "x")
    with pytest.raises(ValueError, match="matching"):
        Trajectory([0, 1], [[0], [1]], [[0]], "x")


def test_accessors():
    tr = sample()
    assert len(tr) == 3
    np.testing.assert_array_equal(tr.final, [1 / 3, 2 / 3])
    np.testing.assert_array_equal(tr.at(0.11), [0.2, 0.8])


def test_json_roundtrip_is_exact():
    tr = sample()
    doc = json.loads(tr.to_json({"seed": 1}))
    assert doc["provenance"] == {"seed": 1}
    assert doc["trajectory"][0]["beta"] is None
    assert doc["trajectory"][0]["GL"] is None
    back = Trajectory.from_json(tr.to_json())
    np.testing.assert_array_equal(back.states, tr.states)
    np.testing.assert_array_equal(back.times, tr.times)
    assert np.isnan(back.betas[0]).all()
    np.testing.assert_array_equal(back.betas[1:], tr.betas[1:])
    assert back.energies[0]["GL"] == math.inf
    assert back.fixed_point and back.meta == {"tau": 0.1}


def test_csv_rows():
    lines = sample().to_csv().splitlines()
    assert lines[0] == "n,t,vertex,u,beta,H,GL,J"
    assert len(lines) == 1 + 3 * 2
    assert lines[1].split(",")[4] == ""
    assert float(lines[5].split(",")[3]) == 1 / 3
