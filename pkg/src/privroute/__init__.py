"""Privacy-preserving path intersection between two drones."""
from .geometry import EncPoint, Orientation, Point, Segment, intersect_plain, orientation_plain
from .paillier import Ciphertext, PrivateKey, PublicKey, keygen

__version__ = "0.1.0"

__all__ = [
    "Ciphertext",
    "EncPoint",
    "Orientation",
    "Point",
    "PrivateKey",
    "PublicKey",
    "Segment",
    "intersect_plain",
    "keygen",
    "orientation_plain",
]
