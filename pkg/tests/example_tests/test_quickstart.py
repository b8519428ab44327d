import runpy
from pathlib import Path

import pytest

QUICK_START = Path(__file__).parents[2] / "docs" / "examples" / "quick_start.py"


def test_quick_start(capsys: pytest.CaptureFixture[str]) -> None:
    namespace = runpy.run_path(str(QUICK_START))
    truth_ids = {tile.tile_id for tile in namespace["truth"]}
    assert {item.tile_id for item in namespace["solution"].selected} <= {tile.tile_id for tile in namespace["tiles"]}
    assert truth_ids
    assert "essential tiles out of" in capsys.readouterr().out
