#!/usr/bin/env python3
"""Fetch the Planetoid citation datasets and convert them to bundles.

Downloads the ind.* files for citeseer / cora / pubmed and writes one bundle
directory per dataset:

    <out>/<name>/edges.txt    whitespace-separated node-id pairs
    <out>/<name>/attrs.csv    row i = attributes of node i
    <out>/<name>/labels.csv   node_id,class_id
    <out>/<name>/meta.json    {"name", "num_classes", "attr_dim"}

Attributes are row-normalized (each row sums to 1) to match the preprocessing
of the reference GCN implementation this pipeline mirrors; pass --raw to keep
the binary/tf-idf values untouched.

Requires: numpy, scipy, requests. Run on a machine with network access; the
training/attack code itself never touches the network.

Usage:
    python3 scripts/fetch_citation_datasets.py --out data
    python3 scripts/fetch_citation_datasets.py --out data --datasets cora
"""

import argparse
import io
import json
import os
import pickle
import sys

import numpy as np
import requests
import scipy.sparse as sp

BASE_URL = "https://github.com/kipf/gcn/raw/master/gcn/data"
PARTS = ["x", "y", "tx", "ty", "allx", "ally", "graph"]


def fetch(url: str) -> bytes:
    r = requests.get(url, timeout=60)
    r.raise_for_status()
    return r.content


def parse_index_file(raw: bytes):
    return [int(line) for line in raw.decode().splitlines() if line.strip()]


def load_planetoid(name: str, cache_dir: str):
    objects = {}
    os.makedirs(cache_dir, exist_ok=True)
    for part in PARTS:
        path = os.path.join(cache_dir, f"ind.{name}.{part}")
        if not os.path.exists(path):
            print(f"  fetching ind.{name}.{part}")
            with open(path, "wb") as f:
                f.write(fetch(f"{BASE_URL}/ind.{name}.{part}"))
        with open(path, "rb") as f:
            objects[part] = pickle.load(f, encoding="latin1")
    index_path = os.path.join(cache_dir, f"ind.{name}.test.index")
    if not os.path.exists(index_path):
        print(f"  fetching ind.{name}.test.index")
        with open(index_path, "wb") as f:
            f.write(fetch(f"{BASE_URL}/ind.{name}.test.index"))
    with open(index_path, "rb") as f:
        test_idx = parse_index_file(f.read())

    x, y = objects["x"], objects["y"]
    tx, ty = objects["tx"], objects["ty"]
    allx, ally = objects["allx"], objects["ally"]
    graph = objects["graph"]

    test_idx_range = np.sort(test_idx)
    if name == "citeseer":
        # Citeseer's test index has gaps; pad the missing rows with zeros,
        # as the reference loader does.
        full = range(min(test_idx), max(test_idx) + 1)
        tx_ext = sp.lil_matrix((len(full), x.shape[1]))
        tx_ext[test_idx_range - min(test_idx), :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), y.shape[1]))
        ty_ext[test_idx_range - min(test_idx), :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_idx, :] = features[test_idx_range, :]
    labels = np.vstack((sp.csr_matrix(ally).toarray(), np.asarray(ty)))
    labels[test_idx, :] = labels[test_idx_range, :]
    return features.tocsr(), labels, graph


def write_bundle(name: str, out_dir: str, features, labels, graph, raw: bool):
    n, attr_dim = features.shape
    num_classes = labels.shape[1]
    os.makedirs(out_dir, exist_ok=True)

    edges = set()
    self_loops = 0
    for u, neighbors in graph.items():
        for v in neighbors:
            if u == v:
                self_loops += 1
                continue
            edges.add((min(u, v), max(u, v)))
    with open(os.path.join(out_dir, "edges.txt"), "w") as f:
        for u, v in sorted(edges):
            f.write(f"{u} {v}\n")

    dense = features.toarray().astype(np.float64)
    if not raw:
        row_sums = dense.sum(axis=1, keepdims=True)
        row_sums[row_sums == 0.0] = 1.0
        dense = dense / row_sums
    with open(os.path.join(out_dir, "attrs.csv"), "w") as f:
        for row in dense:
            f.write(",".join(repr(float(v)) for v in row))
            f.write("\n")

    # Rows padded with all-zero label vectors (isolated citeseer test ids)
    # argmax to class 0, matching the effective behavior of the reference
    # pipeline. They are a handful of nodes per dataset.
    with open(os.path.join(out_dir, "labels.csv"), "w") as f:
        for node in range(n):
            f.write(f"{node},{int(np.argmax(labels[node]))}\n")

    with open(os.path.join(out_dir, "meta.json"), "w") as f:
        json.dump(
            {"name": name, "num_classes": int(num_classes),
             "attr_dim": int(attr_dim)}, f, indent=2)
        f.write("\n")

    print(f"  {name}: {n} nodes, {len(edges)} edges, {attr_dim} attrs, "
          f"{num_classes} classes, {self_loops} self-loops dropped")


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="data", help="bundle output root")
    ap.add_argument("--cache", default=".planetoid_cache",
                    help="raw download cache directory")
    ap.add_argument("--datasets", nargs="+",
                    default=["citeseer", "cora", "pubmed"],
                    choices=["citeseer", "cora", "pubmed"])
    ap.add_argument("--raw", action="store_true",
                    help="skip attribute row normalization")
    args = ap.parse_args()

    for name in args.datasets:
        print(f"preparing {name} ...")
        features, labels, graph = load_planetoid(name, args.cache)
        write_bundle(name, os.path.join(args.out, name), features, labels,
                     graph, args.raw)
    print("done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
