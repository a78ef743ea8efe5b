"""One retrieval session, step by step, with every bit printed.

The instance is small enough to follow by hand: two databases, two
messages of three bits, a one-bit shared key. The user wants message 0
without telling the databases which one, and the databases want to show
the user as little as possible about message 1.
"""

import math
import random

from alpir import (MessageStore, SystemParams, answer, decode, make_queries,
                   path_distribution, plan_partition, residual_view,
                   sample_path, session_download_bits)

params = SystemParams(n_databases=2, n_messages=2, message_bits=3,
                      eps=math.log(1.5), delta=4 / 15)

# 1. Layout: how much key, and how each message splits into a masked
#    part (one-time-padded by the key) and an open part.
layout = plan_partition(params)
print("layout:")
print(f"  key bits            {layout.key_bits}")
print(f"  masked subpacket    {layout.masked_subpacket_bits} bit(s)")
print(f"  open subpacket      {layout.open_subpacket_bits} bit(s)")
print(f"  realized key rate   {layout.effective_alpha:.4f}")
print(f"  realized leak rate  {layout.effective_delta:.4f}")
print()

# 2. Content. Both databases hold the same messages and the same key;
#    the user knows neither.
rng = random.Random(11)
store = MessageStore.random(params, layout, rng)
for i, m in enumerate(store.messages):
    print(f"  W{i} = {m.to01()}")
print(f"  key = {store.key.to01()}  (known to the databases only)")
print()

# 3. The user draws a query path. Low-cost paths leave the undesired
#    coordinates at zero; high-cost paths pay one extra subpacket per
#    database but hide the target better against the e^eps ratio test.
dist = path_distribution(params)
print(f"path law: p={dist.p:.3f} per low base, q={dist.q:.3f} per high, "
      f"p/q={dist.p / dist.q:.3f}")
desired = 0
choice = sample_path(dist, desired, rng)
print(f"sampled base {choice.base} for target W{desired}: "
      f"{choice.path_class.value}-cost path")
queries = make_queries(choice, params)
for d, q in enumerate(queries):
    print(f"  database {d} is asked for v = {q.indices}")
print()

# 4. Each database XORs the requested subpackets, key on the masked
#    side, nothing on the open side when its vector is all zero.
answers = [answer(store, layout, q) for q in queries]
for d, a in enumerate(answers):
    print(f"  database {d} answers masked={a.masked.to01()!r} "
          f"open={a.open.to01()!r}")
total = sum(a.masked.nbits + a.open.nbits for a in answers)
print(f"  downloaded {total} bits "
      f"(= {session_download_bits(layout, choice.path_class)} for this "
      f"path class)")
print()

# 5. Decoding pairs the answer whose desired coordinate is zero with
#    each of the others; the key and all undesired content cancel.
decoded = decode(answers, queries, desired)
print(f"decoded W{desired} = {decoded.to01()}  "
      f"(match: {decoded == store.messages[desired]})")

# 6. What did the user learn beyond W0? Strip the decoded message back
#    out of the open parts and see what survives.
view = residual_view(answers, queries, decoded, layout)
if view.bits is None:
    print("residual view: empty, this path leaked nothing about W1")
else:
    pieces = " + ".join(f"open subpacket {i} of W{m}"
                        for m, i in view.coefficients)
    print(f"residual view: {view.bits.to01()} = {pieces} "
          f"({view.leaked_bits} bits of W1 exposed)")
print()

# 7. Averages over many sessions match the closed form; run the other
#    demos for the full simulation and the leakage audits.
lows = highs = 0
for i in range(2000):
    c = sample_path(dist, desired, random.Random(i))
    if c.path_class.value == "Low":
        lows += 1
    else:
        highs += 1
print(f"over 2000 sampled paths: {lows} low / {highs} high "
      f"(expected split {dist.low_total:.3f} / {1 - dist.low_total:.3f})")
