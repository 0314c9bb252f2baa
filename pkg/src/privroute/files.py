"""Path, key and config file formats.

Path files hold one ``x,y`` point per line in decimal integers. Blank lines
and lines starting with ``#`` are ignored. Key files and simulator / probe
configs are JSON.
"""
from __future__ import annotations

import json
from pathlib import Path as FsPath

from gmpy2 import mpz

from .flight import Drone, FlightConfig
from .geometry import COORD_BITS, Point
from .paillier import PrivateKey, PublicKey
from .probe import ProbeConfig


class PathFormatError(ValueError):
    pass


def parse_path(text: str, source: str = "<path>") -> list[Point]:
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise PathFormatError(f"{source}:{lineno}: expected 'x,y', got {line!r}")
        try:
            x, y = (int(p, 10) for p in parts)
        except ValueError:
            raise PathFormatError(f"{source}:{lineno}: non-integer coordinate in {line!r}") from None
        if abs(x) >= 1 << COORD_BITS or abs(y) >= 1 << COORD_BITS:
            raise PathFormatError(f"{source}:{lineno}: coordinate out of the {COORD_BITS}-bit range")
        points.append(Point(x, y))
    if not points:
        raise PathFormatError(f"{source}: path has no points")
    return points


def load_path(file) -> list[Point]:
    file = FsPath(file)
    return parse_path(file.read_text(), str(file))


def format_path(points) -> str:
    return "".join(f"{x},{y}\n" for x, y in points)


def save_keypair(file, keypair) -> None:
    _, sk = keypair
    FsPath(file).write_text(json.dumps({"p": str(sk.p), "q": str(sk.q)}) + "\n")


def load_keypair(file) -> tuple[PublicKey, PrivateKey]:
    data = json.loads(FsPath(file).read_text())
    p, q = mpz(int(data["p"])), mpz(int(data["q"]))
    pk = PublicKey(p * q)
    return pk, PrivateKey(p, q, pk)


def load_sim_config(file) -> tuple[list[Drone], FlightConfig]:
    """``{"drones": [{"id", "path": [[x, y], ...], "speed"}], ...FlightConfig fields}``"""
    data = json.loads(FsPath(file).read_text())
    drones = [Drone(str(d["id"]), [Point(int(x), int(y)) for x, y in d["path"]], float(d["speed"]))
              for d in data.pop("drones")]
    return drones, FlightConfig(**data)


def load_probe_config(file) -> ProbeConfig:
    return ProbeConfig(**json.loads(FsPath(file).read_text()))
