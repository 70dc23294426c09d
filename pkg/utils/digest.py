import hashlib


class DigestManager:
    """Short sha256 digests of canonical config text."""

    def __init__(self, length: int = 16):
        if length < 8 or length > 64:
            raise ValueError("digest length must be between 8 and 64 hex chars.")
        self.length = length

    def digest_text(self, text: str) -> str:
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[: self.length]


# Shared instance (stateless apart from its length)
digest_manager = DigestManager()
