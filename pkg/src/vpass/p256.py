"""P-256 / ES256 signing plumbing on top of the cryptography package.

Two signature encodings are in play: WebAuthn assertions carry ASN.1 DER
ECDSA signatures, while credential proofs use the fixed-width 64-byte
r||s form. Both are provided here so callers never touch DER directly.
"""

from __future__ import annotations

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import (
    decode_dss_signature,
    encode_dss_signature,
)

from .core import CoseKey


def generate_private_key() -> ec.EllipticCurvePrivateKey:
    return ec.generate_private_key(ec.SECP256R1())


def cose_from_private_key(private_key: ec.EllipticCurvePrivateKey) -> CoseKey:
    return cose_from_public_key(private_key.public_key())


def cose_from_public_key(public_key: ec.EllipticCurvePublicKey) -> CoseKey:
    numbers = public_key.public_numbers()
    return CoseKey(x=numbers.x.to_bytes(32, "big"), y=numbers.y.to_bytes(32, "big"))


def public_key_from_cose(key: CoseKey) -> ec.EllipticCurvePublicKey:
    numbers = ec.EllipticCurvePublicNumbers(
        int.from_bytes(key.x, "big"),
        int.from_bytes(key.y, "big"),
        ec.SECP256R1(),
    )
    return numbers.public_key()


def sign_der(private_key: ec.EllipticCurvePrivateKey, message: bytes) -> bytes:
    """ES256 signature in ASN.1 DER form (WebAuthn assertion convention)."""
    return private_key.sign(message, ec.ECDSA(hashes.SHA256()))


def verify_der(key: CoseKey, message: bytes, signature: bytes) -> bool:
    try:
        public_key_from_cose(key).verify(signature, message, ec.ECDSA(hashes.SHA256()))
    except (InvalidSignature, ValueError):
        return False
    return True


def sign_raw(private_key: ec.EllipticCurvePrivateKey, message: bytes) -> bytes:
    """ES256 signature as fixed-width r||s (64 bytes, JOSE convention)."""
    r, s = decode_dss_signature(sign_der(private_key, message))
    return r.to_bytes(32, "big") + s.to_bytes(32, "big")


def verify_raw(key: CoseKey, message: bytes, signature: bytes) -> bool:
    if len(signature) != 64:
        return False
    der = encode_dss_signature(
        int.from_bytes(signature[:32], "big"),
        int.from_bytes(signature[32:], "big"),
    )
    return verify_der(key, message, der)


def private_key_to_pem(private_key: ec.EllipticCurvePrivateKey) -> bytes:
    return private_key.private_bytes(
        serialization.Encoding.PEM,
        serialization.PrivateFormat.PKCS8,
        serialization.NoEncryption(),
    )


def private_key_from_pem(pem: bytes) -> ec.EllipticCurvePrivateKey:
    key = serialization.load_pem_private_key(pem, password=None)
    if not isinstance(key, ec.EllipticCurvePrivateKey) or not isinstance(
        key.curve, ec.SECP256R1
    ):
        raise ValueError("expected a P-256 private key")
    return key
