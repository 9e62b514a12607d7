#!/usr/bin/env python3
"""Regenerate the packaged default model (src/groupsense/data/default_v1.json)."""

import json
from pathlib import Path

from groupsense.defaults import build_default_model
from groupsense.model import save_model

OUT = Path(__file__).resolve().parents[1] / "src" / "groupsense" / "data" / "default_v1.json"


def main() -> None:
    model = build_default_model()
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(save_model(model), indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT}")
    print(f"metadata: {dict(model.metadata)}")


if __name__ == "__main__":
    main()
