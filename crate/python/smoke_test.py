"""Smoke test for the se2n extension module.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import se2n

SIZE = 32


def main():
    assert "fig3-down" in se2n.presets()

    original = se2n.smooth_field(SIZE, 7)
    mask = se2n.grid_mask(SIZE, 3, 0.37)
    corrupted = [v if good else 0.0 for v, good in zip(original, mask)]
    assert len(original) == SIZE * SIZE and not all(mask)

    restored = se2n.inpaint(corrupted, SIZE, mask, angles=12, steps=40)
    assert len(restored) == SIZE * SIZE
    assert all(0.0 <= v <= 1.0 for v in restored)
    before = se2n.psnr(corrupted, original, SIZE)
    after = se2n.psnr(restored, original, SIZE)
    assert after > before, (before, after)

    # zero-valued pixels are the fallback bad set
    assert se2n.inpaint(corrupted, SIZE, None, angles=12, steps=40) == restored

    gft = se2n.kernel(0.5, 0.3, 0.1, 1, 4, 1.0)
    direct = se2n.kernel(0.5, 0.3, 0.1, 1, 4, 1.0, formula="direct")
    assert abs(gft - direct) <= 1e-6, (gft, direct)

    passed, detail = se2n.verify("orbit")
    assert passed, detail

    for bad in (lambda: se2n.inpaint(corrupted, SIZE + 1), lambda: se2n.verify("nope")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"se2n {se2n.__version__}: PSNR {before:.2f} -> {after:.2f} dB, kernel gap {abs(gft - direct):.1e}")


if __name__ == "__main__":
    main()
