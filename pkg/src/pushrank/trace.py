"""Per-step convergence traces and their CSV serialization.

Schema (header is byte-exact): ``step,updates,err_l1,cert,defect`` with
floats rendered at 17 significant digits so files round-trip losslessly and
diff cleanly across runs. Optional per-page state snapshots append columns
``x0..x{n-1}``. Missing values (no oracle available) serialize as ``nan``.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Trace", "CSV_HEADER", "format_float"]

CSV_HEADER = "step,updates,err_l1,cert,defect"


def format_float(v):
    return f"{v:.17g}"


class Trace:
    """Append-only record of (step, cumulative updates, error columns).

    `err_l1` is the exact error against the oracle rank vector, `cert` the
    residual-based certificate, `defect` the conservation defect; any of
    them may be NaN when not computable for the run at hand.
    """

    __slots__ = ("steps", "updates", "err_l1", "cert", "defect", "x_rows")

    def __init__(self):
        self.steps = []
        self.updates = []
        self.err_l1 = []
        self.cert = []
        self.defect = []
        self.x_rows = []

    def append(self, step, updates, err_l1=math.nan, cert=math.nan,
               defect=math.nan, x=None):
        self.steps.append(int(step))
        self.updates.append(int(updates))
        self.err_l1.append(float(err_l1))
        self.cert.append(float(cert))
        self.defect.append(float(defect))
        if x is not None:
            self.x_rows.append(np.array(x, dtype=float))

    def __len__(self):
        return len(self.steps)

    @property
    def has_state(self):
        return bool(self.x_rows)

    def column(self, name):
        return np.asarray(getattr(self, name), dtype=float)

    @property
    def final_step(self):
        return self.steps[-1]

    @property
    def final_updates(self):
        return self.updates[-1]

    @property
    def final_err(self):
        return self.err_l1[-1]

    @property
    def final_cert(self):
        return self.cert[-1]

    def lines(self):
        """CSV lines (no trailing newline on items)."""
        header = CSV_HEADER
        if self.has_state:
            width = self.x_rows[0].size
            header += "," + ",".join(f"x{i}" for i in range(width))
        yield header
        for r in range(len(self.steps)):
            cells = [str(self.steps[r]), str(self.updates[r]),
                     format_float(self.err_l1[r]), format_float(self.cert[r]),
                     format_float(self.defect[r])]
            if self.has_state:
                cells.extend(format_float(v) for v in self.x_rows[r])
            yield ",".join(cells)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in self.lines():
                fh.write(line + "\n")
