"""CSV writers for scans, trajectories and distributions.

Each file starts with a ``# config: {...}`` comment holding the resolved run
configuration, then a header row.  Floats are written with 17 significant
digits so values round-trip exactly.
"""

import json

COMMENT_PREFIX = "# config: "


def fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return "%.17g" % float(v)


def render(header, rows, config=None) -> str:
    lines = []
    if config is not None:
        lines.append(COMMENT_PREFIX + json.dumps(config, sort_keys=True))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def read(text: str):
    """Parse a file written by :func:`render`: ``(config, header, rows)``."""
    config = None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and lines[0].startswith(COMMENT_PREFIX):
        config = json.loads(lines[0][len(COMMENT_PREFIX):])
        lines = lines[1:]
    lines = [ln for ln in lines if not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[1:]]
    return config, header, rows


def gap_scan_table(rows, levels):
    header = ["T"] + [f"E{i}" for i in range(levels)] + ["gap01"]
    return header, [[r.coupling, *r.eigenvalues, r.gap01] for r in rows]


TRAJECTORY_HEADER = ["t", "T", "delta", "norm", "F0", "F1", "F0plusF1", "mean_jz"]


def trajectory_table(traj):
    return TRAJECTORY_HEADER, [[s.t, s.coupling, s.delta, s.norm, s.f0, s.f1,
                                s.subspace_population, s.mean_jz] for s in traj.samples]


def interference_table(results):
    return ["phi", "F0", "F1", "leakage"], [[r.phase, r.f0, r.f1, r.residual_leakage]
                                            for r in results]


def distribution_table(dist):
    return ["M", "p"], [[m, p] for m, p in zip(dist.basis.m_values, dist.probabilities)]
