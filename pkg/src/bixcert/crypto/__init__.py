from .curves import INFINITY, SECP256K1, TOY19, CurveParams, Point, base_mul, point_add, point_neg, scalar_mul
from .ecdsa import (KeyPair, Signature, decode_point, digest_to_int, ecdsa_sign, ecdsa_verify,
                    encode_point, keygen, keypair_from_secret)
from .games import collision_oracle, dss_game_referee
from .scheme import PRODUCTION, SCHEMES, TOY, SchemeHandle, hash_bytes

hash = hash_bytes  # noqa: A001

__all__ = [
    "INFINITY", "SECP256K1", "TOY19", "CurveParams", "Point", "base_mul", "point_add",
    "point_neg", "scalar_mul", "KeyPair", "Signature", "decode_point", "digest_to_int",
    "ecdsa_sign", "ecdsa_verify", "encode_point", "keygen", "keypair_from_secret",
    "collision_oracle", "dss_game_referee", "PRODUCTION", "SCHEMES", "TOY", "SchemeHandle",
    "hash_bytes",
]
