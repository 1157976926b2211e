"""
Binary model file for a learned ClusterModel

Layout (all integers little-endian, all floats float64 IEEE-754 little-endian):

    header (16 bytes)
        magic            8s   b"CAPRIOR\\0"
        version          u32
        reserved         u32  (0)
    metadata
        M                u32
        p                u32
        patch_side       u32
        num_patches      u64
        beta             f64
        iterations       u32
        created_at       f64
        dataset_hash     32s  SHA-256 of the patch store
        history_len      u32
        loglik_history   f64 * history_len
        change_history   f64 * history_len
    per cluster (M times)
        gg_mu            f64 * p
        gg_sigma         f64 * p * p   (row-major)
        gg_beta          f64
        gauss_mean       f64 * p
        gauss_cov        f64 * p * p   (row-major)
        member_count     u64
        member_indices   u64 * member_count
    patch store          f64 * num_patches * p  (row-major)
    checksum             u64  CRC-64 of every preceding byte
"""

import struct
from pathlib import Path
from typing import Tuple, Union

import crcmod.predefined
import numpy as np
from loguru import logger
from src.exceptions import ModelChecksumError, ModelTruncatedError, ModelVersionError
from src.models.density import GaussianParams, GGParams
from src.models.prior import Cluster, ClusterModel, TrainingMeta

MAGIC = b"CAPRIOR\x00"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<8sII")
_META = struct.Struct("<IIIQdId32sI")
_COUNT = struct.Struct("<Q")
_CHECKSUM = struct.Struct("<Q")

crc64 = crcmod.predefined.mkPredefinedCrcFun("crc-64")


def _f64(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype="<f8").tobytes()


def serialize_model(model: ClusterModel) -> bytes:
    """Encode a model into the binary container, checksum included"""
    meta = model.training_meta
    history_len = len(meta.loglik_history)
    if len(meta.change_history) != history_len:
        raise ValueError("loglik_history and change_history lengths differ")

    parts = [
        _HEADER.pack(MAGIC, FORMAT_VERSION, 0),
        _META.pack(
            model.M,
            model.p,
            model.patch_side,
            model.num_patches,
            model.beta,
            meta.iterations,
            meta.created_at,
            meta.dataset_hash,
            history_len,
        ),
        _f64(meta.loglik_history),
        _f64(meta.change_history),
    ]
    for cluster in model.clusters:
        parts += [
            _f64(cluster.gg.mu),
            _f64(cluster.gg.sigma),
            struct.pack("<d", cluster.gg.beta),
            _f64(cluster.gauss.mean),
            _f64(cluster.gauss.cov),
            _COUNT.pack(cluster.size),
            np.ascontiguousarray(cluster.member_indices, dtype="<u8").tobytes(),
        ]
    parts.append(_f64(model.patch_store))

    body = b"".join(parts)
    return body + _CHECKSUM.pack(crc64(body))


class _Reader:
    """Bounds-checked cursor over the model body"""

    def __init__(self, body: bytes):
        self.body = body
        self.pos = 0

    def take(self, size: int) -> bytes:
        end = self.pos + size
        if end > len(self.body):
            raise ModelTruncatedError(f"model file ends at byte {len(self.body)}, needed {end}")
        chunk = self.body[self.pos : end]
        self.pos = end
        return chunk

    def unpack(self, fmt: struct.Struct) -> Tuple:
        return fmt.unpack(self.take(fmt.size))

    def floats(self, count: int, shape=None) -> np.ndarray:
        array = np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)
        return array.reshape(shape) if shape is not None else array


def deserialize_model(raw: bytes) -> ClusterModel:
    """
    Decode a binary container

    Raises:
        ModelVersionError: bad magic or unsupported version
        ModelTruncatedError: content shorter than declared
        ModelChecksumError: CRC-64 mismatch
    """
    if len(raw) < _HEADER.size + _CHECKSUM.size:
        raise ModelTruncatedError(f"model file too short ({len(raw)} bytes)")

    magic, version, _ = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ModelVersionError(f"not a model file (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format version {version} (expected {FORMAT_VERSION})")

    body, (stored,) = raw[: -_CHECKSUM.size], _CHECKSUM.unpack(raw[-_CHECKSUM.size :])
    if crc64(body) != stored:
        raise ModelChecksumError("model file checksum mismatch (corrupted or truncated file)")

    reader = _Reader(body)
    reader.take(_HEADER.size)
    M, p, patch_side, num_patches, beta, iterations, created_at, dataset_hash, history_len = reader.unpack(_META)
    loglik_history = reader.floats(history_len).tolist()
    change_history = reader.floats(history_len).tolist()

    clusters = []
    for _ in range(M):
        mu = reader.floats(p)
        sigma = reader.floats(p * p, (p, p))
        (gg_beta,) = reader.unpack(struct.Struct("<d"))
        mean = reader.floats(p)
        cov = reader.floats(p * p, (p, p))
        (count,) = reader.unpack(_COUNT)
        members = np.frombuffer(reader.take(8 * count), dtype="<u8").astype(np.int64)
        clusters.append(
            Cluster(
                gg=GGParams(mu=mu, sigma=sigma, beta=gg_beta),
                gauss=GaussianParams(mean=mean, cov=cov),
                member_indices=members,
            )
        )
    patch_store = reader.floats(num_patches * p, (num_patches, p))
    if reader.pos != len(body):
        raise ModelTruncatedError(f"{len(body) - reader.pos} unexpected trailing bytes in model file")

    meta = TrainingMeta(
        dataset_hash=dataset_hash,
        iterations=iterations,
        created_at=created_at,
        loglik_history=loglik_history,
        change_history=change_history,
    )
    return ClusterModel(
        clusters=clusters, patch_store=patch_store, patch_side=patch_side, beta=beta, training_meta=meta
    )


def save_model(model: ClusterModel, path: Union[str, Path]):
    """Write the model file"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = serialize_model(model)
    path.write_bytes(raw)
    logger.info(f"✓ Model saved to {path} ({len(raw) / 1e6:.1f} MB, M={model.M}, p={model.p})")


def load_model(path: Union[str, Path]) -> ClusterModel:
    """Read and verify a model file"""
    path = Path(path)
    model = deserialize_model(path.read_bytes())
    logger.info(f"✓ Model loaded from {path} (M={model.M}, p={model.p}, patches={model.num_patches:,})")
    return model


__all__ = ["MAGIC", "FORMAT_VERSION", "serialize_model", "deserialize_model", "save_model", "load_model"]
