#!/usr/bin/env python3
"""Regenerate the .world files in worlds/.

Worlds are plain text consumed by the simulator: a key/value header followed
by an ASCII map where '#' is a wall and '.' is free space. The first map row
is the TOP of the world (largest y). This script is the single source of
truth for the bundled maps; rerun it after editing and commit the output.
"""

import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "worlds")


class Map:
    def __init__(self, w, h):
        self.w, self.h = w, h
        self.cells = [["." for _ in range(w)] for _ in range(h)]  # [iy][ix], iy=0 bottom
        self.border()

    def border(self):
        for ix in range(self.w):
            self.cells[0][ix] = "#"
            self.cells[self.h - 1][ix] = "#"
        for iy in range(self.h):
            self.cells[iy][0] = "#"
            self.cells[iy][self.w - 1] = "#"

    def wall(self, ix0, ix1, iy0, iy1):
        """Fill [ix0, ix1) x [iy0, iy1) with wall."""
        for iy in range(iy0, iy1):
            for ix in range(ix0, ix1):
                self.cells[iy][ix] = "#"

    def rows_top_first(self):
        return ["".join(row) for row in reversed(self.cells)]


def write_world(name, header_lines, grid):
    path = os.path.join(OUT, name)
    with open(path, "w") as f:
        for line in header_lines:
            f.write(line + "\n")
        f.write("map\n")
        for row in grid.rows_top_first():
            f.write(row + "\n")
    print("wrote", os.path.relpath(path, os.path.join(HERE, "..")))


def mini():
    # 6 m x 6 m open room: one robot, one victim in the far corner.
    g = Map(60, 60)
    write_world(
        "mini.world",
        [
            "resolution 0.1",
            "geofence 0 0 6 6",
            "seed 1",
            "robot 1.05 1.05 0",
            "victim 4.55 4.55",
        ],
        g,
    )


def two_room():
    # 10 m x 10 m split by a wall at x = 5.0 with a 1.6 m doorway.
    g = Map(100, 100)
    g.wall(50, 51, 1, 42)
    g.wall(50, 51, 58, 99)
    write_world(
        "two_room_10.world",
        [
            "resolution 0.1",
            "geofence 0 0 10 10",
            "seed 1",
            "robot 1.5 1.5 0",
            "robot 1.5 2.5 0",
            "robot 2.5 1.5 0",
        ],
        g,
    )


def maze():
    # 12 m x 12 m, four rooms joined in a ring by doorways, plus one alcove
    # per room: a 2.4 m x 2.2 m recess against the outer wall whose mouth is
    # narrowed to 1.2 m by two jambs. A stop in front of the mouth lidar-maps
    # the axis of the alcove (so no sizeable frontier survives inside), but a
    # victim at the back wall is 1.85 m from the mouth -- beyond camera range
    # for any robot that does not actually drive in. Mapped is not looked-at.
    g = Map(120, 120)
    # Horizontal wall at y = 6.0 with doors at x ~ [2.0,3.2) and [8.8,10.0).
    g.wall(1, 20, 60, 61)
    g.wall(32, 88, 60, 61)
    g.wall(100, 119, 60, 61)
    # Vertical wall at x = 6.0 with doors at y ~ [2.0,3.2) and [8.8,10.0).
    g.wall(60, 61, 1, 20)
    g.wall(60, 61, 32, 88)
    g.wall(60, 61, 100, 119)
    # Alcove walls: two parallel stubs jutting 2.2 m from an outer wall, plus
    # jamb caps leaving a centered 1.2 m opening.
    g.wall(28, 29, 1, 23)  # SW room, south wall, mouth at y=2.3
    g.wall(53, 54, 1, 23)
    g.wall(29, 35, 22, 23)
    g.wall(47, 53, 22, 23)
    g.wall(68, 69, 98, 119)  # NE room, north wall, mouth at y=9.8
    g.wall(93, 94, 98, 119)
    g.wall(69, 75, 98, 99)
    g.wall(87, 93, 98, 99)
    g.wall(1, 23, 73, 74)  # NW room, west wall, mouth at x=2.3
    g.wall(1, 23, 98, 99)
    g.wall(22, 23, 74, 80)
    g.wall(22, 23, 92, 98)
    g.wall(97, 119, 23, 24)  # SE room, east wall, mouth at x=9.9
    g.wall(97, 119, 48, 49)
    g.wall(97, 98, 24, 30)
    g.wall(97, 98, 42, 48)
    g.wall(33, 34, 61, 83)  # NW room, south (mid) wall, mouth at y=8.3
    g.wall(57, 58, 61, 83)
    g.wall(34, 40, 82, 83)
    g.wall(52, 57, 82, 83)
    g.wall(62, 63, 38, 60)  # SE room, north (mid) wall, mouth at y=3.8
    g.wall(86, 87, 38, 60)
    g.wall(63, 69, 38, 39)
    g.wall(81, 86, 38, 39)
    write_world(
        "maze12.world",
        [
            "resolution 0.1",
            "geofence 0 0 12 12",
            "seed 1",
            "robot 1.25 1.25 0",
            "robot 1.25 1.85 0",
            "robot 1.85 1.25 0",
            "victim 4.05 0.45",
            "victim 8.05 11.55",
            "victim 0.45 8.55",
            "victim 11.55 3.55",
            "victim 4.55 6.55",
            "victim 7.45 5.55",
        ],
        g,
    )


def corridor():
    # A 12 m corridor that doubles back on itself: out along the bottom leg,
    # U-turn on the right, back along the top leg. Long odometry loops like
    # this are where a late pose correction moves the most map.
    g = Map(120, 26)
    g.wall(1, 106, 11, 15)
    write_world(
        "corridor_loop.world",
        [
            "resolution 0.1",
            "geofence 0 0 12 2.6",
            "seed 1",
            "robot 0.55 0.55 0",
        ],
        g,
    )


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    mini()
    two_room()
    maze()
    corridor()
