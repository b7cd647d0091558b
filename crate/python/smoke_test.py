"""Smoke test for the coopnav_py extension.

Build and install first:
    pip install --no-build-isolation -e crates/py
"""

import coopnav_py as cn


def main():
    levels = cn.CoopLevel.all()
    assert [str(l) for l in levels[:3]] == ["0000", "1000", "0100"]
    assert cn.CoopLevel("[0110]").stuck_stuck

    assert cn.goodness(1000.0, 0, 10) == 3.0
    assert abs(cn.pearson([1, 2, 3], [2, 4, 6]) - 1.0) < 1e-12

    empty = cn.World(target=(0.9, 0.9), start=(0.1, 0.1))
    r = cn.run(empty, "0000", "0000", seed=1, trace=True)
    assert r.solved and r.st_ms == 3810, r
    assert r.trace_csv().startswith("tick,")

    boxed = cn.World((0.7, 0.5), (0.1, 0.5), [
        (0.3, 0.5, 1.5707963267948966, 0.7),
        (0.15, 0.2, 0.0, 0.4),
        (0.15, 0.8, 0.0, 0.4),
    ])
    assert not boxed.solvable()
    assert not cn.run(boxed, "1111", "1111").solved

    try:
        cn.World((0.5, 0.5), (0.5, 0.5), [(0.5, 0.5, 0.0, 0.3)])
    except ValueError:
        pass
    else:
        raise AssertionError("colliding start accepted")

    results = cn.run_batch("0110", "0110", nruns=20, seed=4)
    again = cn.run_batch("0110", "0110", nruns=20, seed=4)
    assert [x.st_ms for x in results] == [x.st_ms for x in again]
    summary = cn.summarize(results)
    assert summary["nruns"] == 20 and summary["gm"] is not None

    rows = cn.sweep_matched(nruns=5, seed=2)
    assert len(rows) == 16 and rows[0]["coop_x"] == "0000"

    cfg = cn.parse_config('[world]\ntarget = [0.8, 0.5]\nvehicle_start = [0.2, 0.5]\n'
                          '[experiment]\nnruns = 3\n')
    assert len(cfg.batch()) == 3
    assert cn.parse_config(cfg.to_toml()).to_toml() == cfg.to_toml()

    print("smoke test ok:", summary["gm"], r)


if __name__ == "__main__":
    main()
