#!/usr/bin/env python3
"""Brute-force oracle for grid morphology (dilate / erode / close).

Computes, cell by cell with exhaustive neighbourhood scans, the disk
dilation, erosion, and closing of two small masks:

  * an L-shaped blob on a grid whose outside counts as FREE (the
    unbounded-world convention), structuring radius 3.2 cells;
  * a bounded-world grid whose outside counts as OCCUPIED, radius 2.1.

Semantics mirrored from the engine: a cell is occupied after dilation iff
some occupied cell center lies within the radius of its center; occupied
after erosion iff no free cell center (including the virtual cells beyond
the grid border under the world's outside convention) lies within the
radius.  Output rows are frozen into closing_oracle.txt and must match the
distance-transform implementation bit for bit.

Run from this directory:  python3 closing_oracle.py
"""

import math


def brute_dilate(occ, w, h, t, outside_occupied):
    rad = int(math.floor(math.sqrt(t))) + 1
    out = set()
    for iy in range(h):
        for ix in range(w):
            hit = False
            for dy in range(-rad, rad + 1):
                for dx in range(-rad, rad + 1):
                    if dx * dx + dy * dy > t:
                        continue
                    q = (ix + dx, iy + dy)
                    inside = 0 <= q[0] < w and 0 <= q[1] < h
                    if inside:
                        if q in occ:
                            hit = True
                            break
                    elif outside_occupied:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                out.add((ix, iy))
    return out


def brute_erode(occ, w, h, t, outside_occupied):
    rad = int(math.floor(math.sqrt(t))) + 1
    out = set()
    for (ix, iy) in occ:
        keep = True
        for dy in range(-rad, rad + 1):
            for dx in range(-rad, rad + 1):
                if dx * dx + dy * dy > t:
                    continue
                q = (ix + dx, iy + dy)
                inside = 0 <= q[0] < w and 0 <= q[1] < h
                free = (q not in occ) if inside else (not outside_occupied)
                if free:
                    keep = False
                    break
            if not keep:
                break
        if keep:
            out.add((ix, iy))
    return out


def dump(f, title, occ, w, h):
    f.write(title + "\n")
    for iy in range(h):
        f.write("".join("1" if (ix, iy) in occ else "0" for ix in range(w)))
        f.write("\n")


def main() -> None:
    with open("closing_oracle.txt", "w", encoding="ascii") as f:
        # Case 1: unbounded convention, L-shape, radius 3.2 cells.
        w, h = 26, 20
        t = 3.2 * 3.2
        occ = set()
        for iy in range(3, 16):
            for ix in range(6, 10):
                occ.add((ix, iy))
        for iy in range(3, 7):
            for ix in range(6, 18):
                occ.add((ix, iy))
        dil = brute_dilate(occ, w, h, t, outside_occupied=False)
        clo = brute_erode(dil, w, h, t, outside_occupied=False)
        assert clo >= occ, "closing must be extensive"
        dil2 = brute_dilate(clo, w, h, t, outside_occupied=False)
        clo2 = brute_erode(dil2, w, h, t, outside_occupied=False)
        assert clo2 == clo, "closing must be idempotent"
        f.write(f"case unbounded {w} {h} 3.2\n")
        dump(f, "raw", occ, w, h)
        dump(f, "dilated", dil, w, h)
        dump(f, "closed", clo, w, h)

        # Case 2: bounded convention (outside occupied), two blocks near a
        # wall, radius 2.1 cells.
        w, h = 14, 12
        t = 2.1 * 2.1
        occ = set()
        for iy in range(4, 7):
            for ix in range(3, 6):
                occ.add((ix, iy))
        for iy in range(4, 7):
            for ix in range(9, 12):
                occ.add((ix, iy))
        dil = brute_dilate(occ, w, h, t, outside_occupied=True)
        clo = brute_erode(dil, w, h, t, outside_occupied=True)
        assert clo >= occ, "closing must be extensive"
        f.write(f"case bounded {w} {h} 2.1\n")
        dump(f, "raw", occ, w, h)
        dump(f, "dilated", dil, w, h)
        dump(f, "closed", clo, w, h)
    print("froze closing_oracle.txt")


if __name__ == "__main__":
    main()
