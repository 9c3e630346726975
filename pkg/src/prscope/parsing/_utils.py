from __future__ import annotations

import hashlib
from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator, PlainSerializer


class ComplexUtils:
    @staticmethod
    def from_pairs(value: Any) -> np.ndarray:
        """
        Decode nested lists ending in [re, im] pairs.

        >>> ComplexUtils.from_pairs([[1, 0], [0, -1]])
        array([1.+0.j, 0.-1.j])
        """
        if isinstance(value, np.ndarray) and np.iscomplexobj(value):
            return value
        pairs = np.asarray(value, dtype=np.float64)
        if pairs.ndim == 0 or pairs.shape[-1] != 2:  # noqa: PLR2004
            msg = f"expected [re, im] pairs, got an array of shape {pairs.shape}"
            raise ValueError(msg)
        return pairs[..., 0] + 1j * pairs[..., 1]

    @staticmethod
    def to_pairs(array: np.ndarray) -> list:
        """
        >>> ComplexUtils.to_pairs(np.array([1j, 0.5]))
        [[0.0, 1.0], [0.5, 0.0]]
        """
        array = np.asarray(array, dtype=np.complex128)
        return np.stack([array.real, array.imag], axis=-1).tolist()


# numpy arrays read from and written to JSON as [re, im] pairs
ComplexArray = Annotated[
    np.ndarray,
    BeforeValidator(ComplexUtils.from_pairs),
    PlainSerializer(ComplexUtils.to_pairs, return_type=list),
]


class SeedUtils:
    @staticmethod
    def tag_digest(tag: str) -> int:
        """64-bit domain separation constant for a subcommand name."""
        return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "big")

    @staticmethod
    def derive_rng(seed: int, tag: str) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([seed, SeedUtils.tag_digest(tag)]))
