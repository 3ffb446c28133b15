# Two colluding members rewrite everyone between them.
#
# The forged chain verifies.  Only a member that kept the original
# certificates can tell, by comparing chains.
#
# Run with:  python3 demos/midchain_fork.py

import random

from bixcert.adversary import midchain_alter_attack
from bixcert.certificate import strip_forward
from bixcert.crypto import PRODUCTION
from bixcert.ledger import detect_fork, verify_chain
from bixcert.protocol import build_honest_chain
from bixcert.simulation import run_simulation

chain, parties = build_honest_chain(6, PRODUCTION, random.Random(6))
root = strip_forward(chain.root)

# S_1 and S_4 collude and replace S_2 and S_3 with fresh identities.
forged = midchain_alter_attack(chain, 1, 4, parties[1].key_pair, parties[4].key_pair, random.Random(7))
print("forged chain verifies:", verify_chain(forged, root))
print("certificates changed: ", [k for k in range(6) if forged[k] != chain[k]])
print("fork seen by a holder of the original chain at index", detect_fork(chain, forged))
print("holder that stopped at c_1 sees a fork:", detect_fork(chain.truncated(2), forged) is not None)

# The same story with the message bus: E joins after the attack and only
# ever sees the forged chain; R and B still hold the original.
script = """
root R
join A
join B
join C
attack midchain 1 3
join E
exchange R E
query B
"""
result = run_simulation(script, seed=7)
for line in result.lines:
    if line.split()[1] in ("fork", "exchange") or line.startswith(("final", "summary")):
        print(line)
