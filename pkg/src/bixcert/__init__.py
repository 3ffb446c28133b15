"""BIX certificate chains: issuance without a CA, verification, and attack games."""
from .adversary import (GameKind, GameResult, midchain_alter_attack, play_midchain_attack,
                        play_scl_game, play_sts_game)
from .certificate import (Certificate, CrossSignaturePair, Header, SubjectBlock, backward_message,
                          canonical_bytes, decode_certificate, encode_certificate, forward_message,
                          make_root, render_certificate, sign_subject)
from .crypto import PRODUCTION, TOY, KeyPair, SchemeHandle, Signature, ecdsa_sign, ecdsa_verify, keygen
from .ledger import (CertificateChain, Direction, Fault, append_certificate, detect_fork,
                     find_chain_fault, length, verify_certificate, verify_chain)
from .protocol import (ExchangeOutcome, Party, SimBus, build_honest_chain, countersign,
                       exchange_verify, process_request, request_certification)
from .simulation import run_simulation
from .store import StoreLayout, load_chain, save_chain

__version__ = "0.1.0"
