"""SVG frames of a quasistatic state: deformed mesh, crack lips, tip markers.

Frames are byte-stable: fixed svg.hashsalt, no date metadata, text as paths.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402

from varifrac.solver.state import QuasistaticState  # noqa: E402

SVG_RC = {"svg.hashsalt": "varifrac", "svg.fonttype": "path", "path.simplify": False}
MESH_FACE = "#e3e9f0"
MESH_EDGE = "#8a96a3"
CRACK = "#c0392b"
TIP = "#1f2d3d"


def crack_lips(state: QuasistaticState) -> np.ndarray:
    """(s, 2, d) deformed segments, one per side of every cracked edge."""
    cracked_mesh = state.crack.cracked_mesh
    mesh = state.crack.mesh
    parent = cracked_mesh.parent
    values = state.u.values
    cofaces = mesh.facet_cofaces
    segments = []
    for e in state.crack.cracked:
        a, b = mesh.simplices[1][e].tolist()
        for t in cofaces.get(e, []):
            row = cracked_mesh.elements[t]
            na = row[parent[row] == a][0]
            nb = row[parent[row] == b][0]
            segments.append([values[na], values[nb]])
    return np.array(segments).reshape(-1, 2, mesh.ambient_dim)


def tip_positions(state: QuasistaticState) -> np.ndarray:
    parent = state.crack.cracked_mesh.parent
    rows = [int(np.flatnonzero(parent == v)[0]) for v in state.crack.tips]
    return state.u.values[rows].reshape(-1, state.crack.mesh.ambient_dim)


def render_state(state: QuasistaticState, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    u = state.u
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        ax.add_collection(
            PolyCollection(u.values[u.mesh.elements], facecolors=MESH_FACE, edgecolors=MESH_EDGE, linewidths=0.3)
        )
        lips = crack_lips(state)
        if len(lips):
            ax.add_collection(LineCollection(lips, colors=CRACK, linewidths=1.6))
        tips = tip_positions(state)
        if len(tips):
            ax.plot(tips[:, 0], tips[:, 1], linestyle="none", marker="o", markersize=4, color=TIP)
        ax.set_title(
            f"step {state.step}  E = {state.energy.total:.6g}  crack length = {state.crack.crack_length:.4g}",
            fontsize=9,
        )
        ax.set_aspect("equal")
        ax.autoscale_view()
        ax.set_axis_off()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
