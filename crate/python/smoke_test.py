"""Smoke test for the maltsev_py extension.

Build first:  pip install --no-build-isolation -e crates/python
"""

import csv
import io
import json

import maltsev_py


def main():
    cm = maltsev_py.System.from_text(
        "signature f/3\nidentity f(x,x,y) = y\nidentity f(x,y,z) = f(z,y,x)\n"
    )
    assert cm.entails("f(y,y,x) = x")
    assert not cm.entails("f(x,y,x) = x")

    report = json.loads(cm.analyze())
    assert report["class_count"] == 12
    assert report["orbit_count"] == 3

    maltsev = maltsev_py.System.builtin("maltsev")
    assert maltsev.d_min() == 2
    assert maltsev.p_of_k(2) == 2
    assert not maltsev.almost_surely_idemprimal()
    assert maltsev_py.System.builtin("hagemann-mitschke:3").almost_surely_idemprimal()

    models = maltsev.sample(4, seed=7, count=3)
    assert len(models) == 3 and all(m.n == 4 for m in models)
    again = maltsev.sample(4, seed=7, count=3)
    assert [m.to_json() for m in models] == [m.to_json() for m in again]
    back = maltsev_py.Algebra.from_json(models[0].to_json())
    assert back.table(0) == models[0].table(0)
    assert back.is_subuniverse([0, 1, 2, 3])

    text = maltsev_py.census(maltsev, [8], 2000, 5, "fixedB=0,1", threads=2)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 1
    freq = float(rows[0]["frequency"])
    assert abs(freq - 1 / 16) < 0.03, freq

    try:
        maltsev_py.System.from_text("signature f/3\nidentity f(x,x = y\n")
    except maltsev_py.MaltsevError:
        pass
    else:
        raise AssertionError("parse error not raised")

    print("ok")


if __name__ == "__main__":
    main()
