# Growing a BIX chain by hand and checking it.
#
# Run with:  python3 demos/issue_and_verify.py

import random
from dataclasses import replace

from bixcert.certificate import render_certificate, strip_forward
from bixcert.crypto import PRODUCTION, Signature
from bixcert.ledger import CertificateChain, Direction, find_chain_fault, verify_chain
from bixcert.protocol import join_offline, make_root_party, new_party, numbered_bix_id

rng = random.Random(2024)

# The root is self-issued. Everyone else trusts this exact certificate.
root = make_root_party("root", numbered_bix_id(0), PRODUCTION, rng)
trusted = root.trusted_root
print("root issued, issuer == subject:", trusted.issuer == trusted.subject)

# Each newcomer is certified by whoever currently owns the tail.
members = [root]
for k, name in enumerate(["alice", "bob", "carol"], start=1):
    newcomer = new_party(name, numbered_bix_id(k), PRODUCTION, rng)
    chain = join_offline(members[-1], newcomer, rng)
    members.append(newcomer)
    print(f"{name} joined at index {newcomer.index}, chain length {len(chain)}")

# The old tail picked up its forward fields when bob joined.
print()
print(render_certificate(chain[1], PRODUCTION))
print()

print("verify forward: ", verify_chain(chain, trusted, Direction.FORWARD))
print("verify backward:", verify_chain(chain, trusted, Direction.BACKWARD))

# The trusted root is the tail-form certificate; the completed one still matches.
print("root gained forward fields:", strip_forward(chain.root) != chain.root)

# Knock one bit out of bob's self signature and see who notices.
bad_sig = Signature(chain[2].subject_signature.r, chain[2].subject_signature.s ^ 1)
certs = list(chain.certificates)
certs[2] = replace(certs[2], subject_signature=bad_sig)
broken = CertificateChain(tuple(certs), PRODUCTION)
print("tampered chain:", find_chain_fault(broken, trusted))
