"""Smoke test for the centerfocus Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import json
import math

import centerfocus


def main():
    assert "andreev" in centerfocus.corpus_names()
    assert centerfocus.SCHEMA_VERSION == 1

    andreev = centerfocus.System.corpus("andreev")
    diagram = andreev.diagram()
    assert [e["weight"] for e in diagram["edges"]] == [{"p": 1, "q": 2}], diagram

    report = andreev.analyze()
    assert report.verdict == "center", report.summary
    data = json.loads(report.to_json())
    assert data["schema"] == 1
    assert data["verdict"]["kind"] == "center"
    assert len(data["evidence"]) >= 2
    assert report.to_json() == andreev.analyze().to_json()

    linear = centerfocus.System.corpus("linear").with_params({"lam": "1/10"})
    r = linear.analyze()
    assert (r.verdict, r.stability) == ("focus", "unstable"), r.summary

    manosa = centerfocus.System.corpus("manosa1").with_params({"a": "1"})
    eta, err = manosa.eta1(1, 3, 1e-3, 3e-2)
    expected = math.exp(math.pi + 4 * math.pi / math.sqrt(32 - 16))
    assert abs(eta / expected - 1) < 1e-3, (eta, expected)

    toml = """
name = "cubic"
[system]
P = [[0, 1, "1"]]
Q = [[3, 0, "-1"]]
"""
    assert centerfocus.analyze_toml(toml).verdict == "center"

    try:
        centerfocus.System.from_toml("not toml [")
    except ValueError:
        pass
    else:
        raise AssertionError("malformed input accepted")

    table = centerfocus.run_corpus("armengol")
    assert all(passed for _, passed, _ in table["armengol"]), table
    print("smoke test passed")


if __name__ == "__main__":
    main()
