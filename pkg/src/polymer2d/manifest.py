"""Result persistence: delimited output, figures, and run manifests.

Every experiment writes a CSV (metadata comment block, header row, rows
with floats at 17 significant digits so they round-trip exactly), an
optional PNG figure next to it, and a JSON manifest echoing the full
configuration, per-check outcomes, measured quantities and SHA-256
digests of the written files.  The manifest alone re-runs the
experiment bit-identically.
"""

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field

from . import __version__
from .config import ExperimentConfig


def fmt_float(x):
    return f"{x:.17g}"


def write_csv(path, columns, rows, metadata=None):
    lines = []
    for k, v in (metadata or {}).items():
        lines.append(f"# {k} = {v}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(
            fmt_float(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def write_rows_json(path, columns, rows, metadata=None):
    payload = {"metadata": metadata or {}, "columns": list(columns),
               "rows": [[v for v in row] for row in rows]}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class ResultManifest:
    config: dict
    version: str = __version__
    wall_clock_s: float = 0.0
    checks: list = field(default_factory=list)        # {name, passed, detail}
    measurements: list = field(default_factory=list)  # {name, value, stderr}
    outputs: dict = field(default_factory=dict)       # path -> sha256

    @property
    def all_passed(self):
        return all(c["passed"] for c in self.checks)

    def add_check(self, name, passed, detail=""):
        self.checks.append({"name": name, "passed": bool(passed),
                            "detail": str(detail)})

    def add_measurement(self, name, value, stderr=None):
        item = {"name": name, "value": float(value)}
        if stderr is not None:
            item["stderr"] = float(stderr)
        self.measurements.append(item)

    def register(self, path):
        self.outputs[str(path)] = sha256_of(path)

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(self), fh, indent=1, sort_keys=True)
            fh.write("\n")
        return path


def manifest_path_for(out_path):
    s = str(out_path)
    stem = s.rsplit(".", 1)[0] if "." in s.rsplit("/", 1)[-1] else s
    return stem + ".manifest.json"


def load_manifest(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    cfg = ExperimentConfig(**data["config"])
    return cfg, data


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
