"""
File-backed cache for constant-term zero scans
"""
import csv
import logging
import hashlib
from pathlib import Path
from typing import List, Optional

from app.core.config import settings
from app.services.scattering import ConstantTermZero

logger = logging.getLogger(__name__)

SCAN_HEADER = ["a", "t_min", "t_max", "step"]
ZERO_HEADER = ["j", "t_j", "branch", "residual"]


class ZeroCacheError(Exception):
    """Cache file is malformed or belongs to another scan"""


class ZeroCache:
    """CSV zero cache keyed by (a, t_min, t_max, step)

    Floats are written with repr so a cached list reads back bit-for-bit.
    """

    def __init__(self, directory: Optional[Path] = None):
        self.directory = Path(directory or settings.CACHE_DIR)

    def _make_key(self, prefix: str, *args) -> str:
        """Generate cache key from prefix and arguments"""
        key_data = f"{prefix}:{':'.join(repr(float(arg)) for arg in args)}"
        return f"{prefix}_{hashlib.md5(key_data.encode()).hexdigest()}"

    def path_for(self, a: float, t_min: float, t_max: float, step: float) -> Path:
        return self.directory / f"{self._make_key('zeros', a, t_min, t_max, step)}.csv"

    def get(self, a: float, t_min: float, t_max: float, step: float) -> Optional[List[ConstantTermZero]]:
        """Return the cached zero list, or None on a miss"""
        path = self.path_for(a, t_min, t_max, step)
        if not path.exists():
            return None
        try:
            zeros = read_zero_csv(path, expected=(a, t_min, t_max, step))
        except ZeroCacheError as e:
            logger.warning(f"Ignoring cache file {path}: {e}")
            return None
        logger.info(f"Zero cache hit for a={a}, t_max={t_max} ({len(zeros)} zeros)")
        return zeros

    def set(self, a: float, t_min: float, t_max: float, step: float, zeros: List[ConstantTermZero]) -> Path:
        path = self.path_for(a, t_min, t_max, step)
        write_zero_csv(path, a, t_min, t_max, step, zeros)
        logger.info(f"Cached {len(zeros)} zeros in {path}")
        return path

    def delete(self, a: float, t_min: float, t_max: float, step: float) -> bool:
        path = self.path_for(a, t_min, t_max, step)
        if path.exists():
            path.unlink()
            return True
        return False


def write_zero_csv(path: Path, a: float, t_min: float, t_max: float, step: float,
                   zeros: List[ConstantTermZero]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SCAN_HEADER)
        writer.writerow([repr(float(v)) for v in (a, t_min, t_max, step)])
        writer.writerow(ZERO_HEADER)
        for z in zeros:
            writer.writerow([z.index, repr(float(z.t)), z.branch, repr(float(z.residual))])


def read_zero_csv(path: Path, expected: Optional[tuple] = None) -> List[ConstantTermZero]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if len(rows) < 3 or rows[0] != SCAN_HEADER or rows[2] != ZERO_HEADER:
        raise ZeroCacheError("unexpected header")
    scan = tuple(float(v) for v in rows[1])
    if expected is not None and scan != tuple(float(v) for v in expected):
        raise ZeroCacheError(f"scan parameters {scan} do not match {expected}")
    return [
        ConstantTermZero(index=int(j), t=float(t), branch=int(k), residual=float(r))
        for j, t, k, r in rows[3:]
    ]
