#!/usr/bin/env python3
"""Reference values for the C++ tests, computed independently in Python.

Regenerate with `python3 make_goldens.py > goldens.json`.
"""
import json
import math
import re

K1, B = 1.2, 0.75


def tokenize(text):
    out, cur = [], []
    for ch in text.encode("utf-8"):
        if ch >= 0x80 or chr(ch).isalnum():
            cur.append(chr(ch).lower() if ch < 0x80 else chr(ch))
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def bm25_rank(docs, query):
    n = len(docs)
    toks = {d["id"]: tokenize(d["text"]) for d in docs}
    avg = sum(len(t) for t in toks.values()) / n
    df = {}
    for t in toks.values():
        for w in set(t):
            df[w] = df.get(w, 0) + 1
    scores = []
    for d in docs:
        t = toks[d["id"]]
        s = 0.0
        for q in tokenize(query):
            tf = t.count(q)
            if tf == 0:
                continue
            idf = math.log(1 + (n - df[q] + 0.5) / (df[q] + 0.5))
            s += idf * tf * (K1 + 1) / (tf + K1 * (1 - B + B * len(t) / avg))
        if s > 0:
            scores.append((d["id"], s))
    scores.sort(key=lambda x: (-x[1], x[0]))
    return scores, toks, avg


def jaccard(a, b):
    a, b = set(a), set(b)
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def main():
    out = {}
    # BM25 on a one-doc corpus.
    s, _, _ = bm25_rank([{"id": "x", "text": "a b"}], "a")
    out["bm25_single_doc"] = s[0][1]

    # 2-2-1 tanh net.
    w1 = [[0.5, -0.3], [0.8, 0.2]]
    b1 = [0.1, -0.1]
    w2 = [1.5, -2.0]
    b2 = 0.3
    x = [1.0, 2.0]
    h = [math.tanh(sum(w * xi for w, xi in zip(row, x)) + b) for row, b in zip(w1, b1)]
    out["mlp_221"] = sum(w * hi for w, hi in zip(w2, h)) + b2

    docs = [json.loads(l) for l in open("fixture_corpus.jsonl")]
    tasks = [json.loads(l) for l in open("fixture_tasks.jsonl")]
    q = tasks[0]["query"]
    pool, toks, avg = bm25_rank(docs, q)
    pool = pool[:10]
    out["fixture_pool"] = [[d, s] for d, s in pool]
    out["fixture_avg_len"] = avg

    # featurize(state: template 1 chosen, pool position 0 selected,
    #           action: select pool position 2), k_max 3, N_pool 10.
    maxs = pool[0][1]
    qt = tokenize(q)
    cand = pool[2][0]
    f = [0.0] * 12
    f[0] = 1.0
    f[1] = 1 / 3
    f[2] = 0.0
    f[3 + 1] = 1.0
    f[7] = pool[2][1] / maxs
    f[8] = 2 / 10
    f[9] = jaccard(qt, toks[cand])
    f[10] = jaccard(toks[cand], toks[pool[0][0]])
    f[11] = min(len(toks[cand]) / avg, 2.0) / 2.0
    out["fixture_features"] = f

    # Q-values of a linear 12 -> 1 net with weights 0.1 * (i + 1), bias -0.2,
    # in the state above (legal: unselected pool positions, then Stop).
    w = [0.1 * (i + 1) for i in range(12)]
    qs = []
    for p in range(len(pool)):
        if p == 0:
            continue
        g = [0.0] * 12
        g[0], g[1], g[4] = 1.0, 1 / 3, 1.0
        cid = pool[p][0]
        g[7] = pool[p][1] / maxs
        g[8] = p / 10
        g[9] = jaccard(qt, toks[cid])
        g[10] = jaccard(toks[cid], toks[pool[0][0]])
        g[11] = min(len(toks[cid]) / avg, 2.0) / 2.0
        qs.append(["D%d" % p, sum(a * b for a, b in zip(w, g)) - 0.2])
    g = [0.0] * 12
    g[0], g[1], g[2], g[4] = 1.0, 1 / 3, 1.0, 1.0
    qs.append(["STOP", sum(a * b for a, b in zip(w, g)) - 0.2])
    out["fixture_q_values"] = qs
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
