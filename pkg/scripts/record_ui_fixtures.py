#!/usr/bin/env python3
"""Record real server responses as fixtures for the frontend contract tests.

Responses are captured through the HTTP app (TestClient), so the fixtures
are exactly what the browser would receive.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from groupsense import Group, default_model
from groupsense.chart import Category, Chart, Point, chart_to_dict, layout
from groupsense.redesign import score_permutation
from groupsense.service import create_app

OUT = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"

DESIRED = [["A", "B"], ["C", "D"], ["E", "F"]]


def beverage_chart() -> Chart:
    # three categories of two items each: the soda pair sits isolated at the
    # bottom (a detected desired group), while the mid-band items form
    # cross-category lines (violations) and the other desired pairs go missed
    values = {"A": 62.0, "B": 55.0, "C": 48.0, "D": 30.0, "E": 12.0, "F": 8.0}
    return Chart(
        points=tuple(Point(l, values[l]) for l in "ABCDEF"),
        hierarchy=(
            Category("tea", ("A", "B")),
            Category("coffee", ("C", "D")),
            Category("soda", ("E", "F")),
        ),
    )


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    chart = beverage_chart()
    with tempfile.TemporaryDirectory() as tmp:
        client = TestClient(create_app(data_dir=tmp))

        created = client.post("/api/charts", json=chart_to_dict(chart)).json()
        (OUT / "chart.json").write_text(json.dumps(created, indent=2))

        diag = client.post(
            "/api/diagnose",
            json={"chart_id": created["id"], "desired": DESIRED},
        )
        diag.raise_for_status()
        (OUT / "diagnose.json").write_text(json.dumps(diag.json(), indent=2))

        redes = client.post(
            "/api/redesign",
            json={
                "chart_id": created["id"],
                "desired": DESIRED,
                "alpha": 0.7,
                "k": 3,
                "include_landscape": True,
            },
        )
        redes.raise_for_status()
        (OUT / "redesign.json").write_text(json.dumps(redes.json(), indent=2))

    # identity-order score (same shape as one results[] entry); lets the UI
    # tests check that applying the identity permutation reproduces the
    # plain diagnosis gallery
    identity = score_permutation(
        chart, chart.labels, [Group(m) for m in DESIRED], default_model(), alpha=0.7
    )
    (OUT / "identity_score.json").write_text(json.dumps(identity.to_dict(), indent=2))

    # engine layout coordinates: the contract for the UI's own slot math
    lay = layout(chart)
    (OUT / "layout.json").write_text(
        json.dumps(
            {
                "labels": list(chart.labels),
                "xs": lay.xs.tolist(),
                "ys": lay.ys.tolist(),
                "width_px": chart.plot.width_px,
                "height_px": chart.plot.height_px,
            },
            indent=2,
        )
    )
    print(f"wrote fixtures to {OUT}")
    report = json.loads((OUT / "diagnose.json").read_text())
    print(f"detected groups: {len(report['detected'])}, "
          f"missed: {len(report['missed_desired'])}")


if __name__ == "__main__":
    main()
