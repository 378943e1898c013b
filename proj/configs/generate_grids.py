#!/usr/bin/env python3
"""Regenerates ne_like.json and three_machine.json.

Mechanical powers are set so that the listed rotor angles are an exact
equilibrium of the classical model.
"""
import json
import math
import pathlib

HERE = pathlib.Path(__file__).resolve().parent


def electrical_power(delta, E, G, B):
    n = len(delta)
    out = []
    for i in range(n):
        s = 0.0
        for j in range(n):
            d = delta[i] - delta[j]
            s += E[i] * E[j] * (G[i][j] * math.cos(d) + B[i][j] * math.sin(d))
        out.append(s)
    return out


def ne_like():
    n = 10
    H = [500.0, 30.3, 35.8, 28.6, 26.0, 34.8, 26.4, 24.3, 34.5, 42.0]
    E = [1.0, 1.04, 1.03, 1.02, 1.01, 1.05, 1.04, 1.03, 1.02, 1.05]
    links = [(8, 10, 6.0), (2, 3, 2.5), (3, 6, 1.5), (6, 7, 3.0), (7, 9, 1.0), (2, 9, 1.5),
             (6, 9, 1.0), (4, 5, 3.0), (4, 6, 1.5), (5, 6, 1.0), (8, 9, 0.8), (10, 2, 1.0),
             (10, 3, 0.5), (1, 2, 1.5), (1, 3, 1.0), (1, 4, 1.2), (1, 5, 1.2), (1, 7, 1.0),
             (1, 9, 1.5), (1, 10, 1.5), (1, 8, 0.5), (1, 6, 1.0)]
    B = [[0.0] * n for _ in range(n)]
    G = [[0.0] * n for _ in range(n)]
    for a, b, v in links:
        B[a - 1][b - 1] = B[b - 1][a - 1] = v
        G[a - 1][b - 1] = G[b - 1][a - 1] = 0.02 * v
    for i in range(n):
        B[i][i] = -sum(B[i])
        G[i][i] = 0.6
    delta = [0.0, 0.3, 0.35, 0.4, 0.45, 0.4, 0.35, 0.5, 0.3, 0.45]
    return {
        "name": "ne_like",
        "n_gen": n - 1,
        "reference": 0,
        "reference_angle": 0.0,
        "base_frequency": 60.0,
        "inertia": H,
        "damping": [0.05] * n,
        "mech_power": electrical_power(delta, E, G, B),
        "internal_voltage": E,
        "conductance": G,
        "susceptance": B,
    }


def three_machine():
    B = [[-2.0, 1.0, 1.0], [1.0, -1.0, 0.0], [1.0, 0.0, -1.0]]
    G = [[0.0] * 3 for _ in range(3)]
    return {
        "name": "three_machine",
        "n_gen": 2,
        "reference": 0,
        "reference_angle": 0.0,
        "base_frequency": 60.0,
        "inertia": [1000.0, 5.0, 5.0],
        "damping": [0.0, 0.1, 0.1],
        "mech_power": [-1.0, 0.5, 0.5],
        "internal_voltage": [1.0, 1.0, 1.0],
        "conductance": G,
        "susceptance": B,
    }


if __name__ == "__main__":
    for name, grid in (("ne_like.json", ne_like()), ("three_machine.json", three_machine())):
        (HERE / name).write_text(json.dumps(grid, indent=2) + "\n")
