"""Dense lowest-order VEM stiffness of a polygon, written independently of the
Rust code. Prints JSON for the unit square."""
import json
import numpy as np


def vem_stiffness(v):
    v = np.asarray(v, float)
    n = len(v)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = cross.sum() / 2
    cx = ((x + xn) * cross).sum() / (6 * area)
    cy = ((y + yn) * cross).sum() / (6 * area)
    h = max(np.hypot(*(v[i] - v[j])) for i in range(n) for j in range(n))
    # scaled monomials 1, (x-cx)/h, (y-cy)/h
    d = np.column_stack([np.ones(n), (x - cx) / h, (y - cy) / h])
    b = np.zeros((3, n))
    b[0, :] = 1.0 / n
    for i in range(n):
        prev, nxt = v[i - 1], v[(i + 1) % n]
        # sum of outward normals of the two edges at vertex i, halved
        t = nxt - prev
        normal = np.array([t[1], -t[0]]) / 2
        b[1:, i] = normal / h
    g = b @ d
    pi_star = np.linalg.solve(g, b)
    pi = d @ pi_star
    gt = g.copy()
    gt[0, :] = 0
    stab = (np.eye(n) - pi).T @ (np.eye(n) - pi)
    return pi_star.T @ gt @ pi_star + stab


if __name__ == "__main__":
    sq = [[0, 0], [1, 0], [1, 1], [0, 1]]
    print(json.dumps({"vertices": sq, "stiffness": vem_stiffness(sq).tolist()}, indent=1))
