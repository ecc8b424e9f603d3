"""Regenerate the golden CLI outputs: ``python3 tests/golden/make_golden.py``.

Only rerun after an intentional change of results; review the diff.
"""
import json
import sys
from pathlib import Path

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE.parent))

from test_acceptance import GOLDEN_CASES, run_cli  # noqa: E402

for name, argv in GOLDEN_CASES.items():
    code, out = run_cli(argv)
    assert code == 0, name
    (HERE / f"{name}.json").write_text(json.dumps(json.loads(out)["results"], indent=2) + "\n")
    print("wrote", name)
