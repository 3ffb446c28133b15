# Playing the two attack games against an honest chain.
#
# The bundled strategies should all lose on the production scheme.  The same
# games on the 19-element toy curve go to the adversary, which shows the
# referee can report a win when one really happens.
#
# Run with:  python3 demos/attack_games.py

import random

from bixcert.adversary import (SCL_STRATEGIES, STS_STRATEGIES, play_scl_game, play_sts_game,
                               scl_brute_force, sts_brute_force)
from bixcert.crypto import PRODUCTION, TOY
from bixcert.protocol import build_honest_chain

chain, _ = build_honest_chain(6, PRODUCTION, random.Random(1))

print("lengthening without the tail owner:")
for name, strategy in SCL_STRATEGIES.items():
    wins = sum(play_scl_game(chain, strategy, random.Random(s)).adversary_won for s in range(20))
    last = play_scl_game(chain, strategy, random.Random(0))
    print(f"  {name:18s} wins {wins}/20, first rejection at {last.rejected_by}")

print("tampering with the subject of c_2:")
for name, strategy in STS_STRATEGIES.items():
    result = play_sts_game(chain, 2, strategy, random.Random(0))
    print(f"  {name:18s} won={result.adversary_won} rejected at {result.rejected_by}")

toy_chain, _ = build_honest_chain(4, TOY, random.Random(1))
print("toy curve, secrets recovered by exhaustive search:")
print(" ", play_scl_game(toy_chain, scl_brute_force, random.Random(0)).summary())
print(" ", play_sts_game(toy_chain, 1, sts_brute_force, random.Random(0)).summary())
