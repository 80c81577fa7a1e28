"""Teacher-forced training loop, loss, checkpoints, and the run log.

Checkpoints are single self-describing files: a magic string, a JSON header
(config, vocabulary size, parameter names and shapes, optimizer step
counter), the raw float64 little-endian parameter and optimizer buffers in
header order, and a trailing SHA-256 of everything before it. Loading
verifies the digest, so truncation or bit corruption fails loudly rather
than producing a silently wrong model.

The run log is deterministic given the seed: JSONL with one header line and
one line per epoch. Wall-clock time lives in a separate metadata file so
log bytes stay reproducible.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time

import numpy as np

from .config import TrainConfig, config_hash
from .model import Summarizer, prepare_example
from .numerics import Adam, Tensor, clip_grad_norm, log, pick, tsum

_MAGIC = b"GSUMCKPT1\n"


class CheckpointError(ValueError):
    pass


def nll_loss(probs, gold_ids, mask=None):
    """Mean negative log-likelihood of the gold ids under ``probs``.

    probs: (T, extended) rows; gold_ids: (T,) ints. Probabilities are
    floored at 1e-12 before the log. ``mask`` (T,) of {0,1} drops padded
    positions from both the sum and the averaging count.
    """
    gold_ids = np.asarray(gold_ids, dtype=np.int64)
    if probs.shape[0] != gold_ids.shape[0]:
        raise ValueError(
            f"got {probs.shape[0]} distributions for {gold_ids.shape[0]} gold ids")
    if gold_ids.size and gold_ids.max() >= probs.shape[1]:
        raise ValueError(
            f"gold id {int(gold_ids.max())} outside extended vocabulary "
            f"of size {probs.shape[1]}")
    picked = pick(probs, gold_ids)
    logs = log(picked, floor=1e-12)
    if mask is not None:
        mask = np.asarray(mask, dtype=np.float64)
        count = float(mask.sum())
        if count == 0:
            raise ValueError("mask removes every position")
        return -tsum(logs * Tensor(mask)) / count
    return -tsum(logs) / float(gold_ids.shape[0])


def example_loss(model, prep, training=True, rng=None):
    cache = model.encode(prep, training=training, rng=rng)
    probs, _ = model.forward_sequence(cache, prep.dec_input_ids,
                                      training=training, rng=rng)
    return nll_loss(probs, prep.gold_ids)


@dataclasses.dataclass
class TrainLog:
    config_hash: str
    entries: list = dataclasses.field(default_factory=list)

    def append(self, epoch, loss, val_rouge1):
        self.entries.append({"epoch": epoch, "loss": loss,
                             "val_rouge1": val_rouge1})

    def dumps(self):
        lines = [json.dumps({"config_hash": self.config_hash}, sort_keys=True)]
        for e in self.entries:
            lines.append(json.dumps(e, sort_keys=True))
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())


# -- checkpoint container ----------------------------------------------------


def save_checkpoint(path, model, optimizer=None):
    params = model.parameters()
    header = {
        "config": _config_payload(model.config),
        "config_hash": model.config_hash(),
        "vocab_size": model.vocab_size,
        "params": [{"name": p.name, "shape": list(p.shape)} for p in params],
        "optimizer_step": optimizer.t if optimizer is not None else None,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks = [_MAGIC, len(header_bytes).to_bytes(8, "little"), header_bytes]
    for p in params:
        chunks.append(np.ascontiguousarray(p.data, dtype="<f8").tobytes())
    if optimizer is not None:
        for buf in optimizer.m + optimizer.v:
            chunks.append(np.ascontiguousarray(buf, dtype="<f8").tobytes())
    body = b"".join(chunks)
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(hashlib.sha256(body).digest())


def _config_payload(config):
    d = dataclasses.asdict(config)
    d["edge_types"] = list(d["edge_types"])
    return d


def _config_from_payload(payload):
    payload = dict(payload)
    payload["edge_types"] = tuple(payload["edge_types"])
    return TrainConfig(**payload)


def read_checkpoint(path):
    """Parse and integrity-check a checkpoint file.

    Returns (config, vocab_size, params dict name->array, optimizer_step,
    moment arrays or None).
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(_MAGIC) + 8 + 32 or not blob.startswith(_MAGIC):
        raise CheckpointError(f"{path}: not a checkpoint file")
    body, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError(f"{path}: integrity check failed (truncated or corrupted)")
    off = len(_MAGIC)
    hlen = int.from_bytes(body[off:off + 8], "little")
    off += 8
    header = json.loads(body[off:off + hlen].decode("utf-8"))
    off += hlen
    params = {}
    for meta in header["params"]:
        shape = tuple(meta["shape"])
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(body, dtype="<f8", count=n, offset=off).reshape(shape)
        params[meta["name"]] = arr.copy()
        off += n * 8
    moments = None
    if header["optimizer_step"] is not None:
        # moment buffers repeat the parameter layout: all m, then all v
        m_list, v_list = [], []
        for target in (m_list, v_list):
            for meta in header["params"]:
                shape = tuple(meta["shape"])
                n = int(np.prod(shape)) if shape else 1
                arr = np.frombuffer(body, dtype="<f8", count=n, offset=off)
                target.append(arr.reshape(shape).copy())
                off += n * 8
        moments = (m_list, v_list)
    config = _config_from_payload(header["config"])
    return config, header["vocab_size"], params, header["optimizer_step"], moments


def load_model(path):
    """Rebuild the model a checkpoint was saved from."""
    config, vocab_size, params, _, _ = read_checkpoint(path)
    model = Summarizer(config, vocab_size)
    _assign(model, params)
    return model


def load_into(model, path):
    """Load parameters into an existing model; config hashes must match."""
    config, vocab_size, params, _, _ = read_checkpoint(path)
    if config_hash(config) != model.config_hash():
        raise CheckpointError(
            "checkpoint was written under a different configuration "
            f"({config_hash(config)[:12]} vs {model.config_hash()[:12]})")
    if vocab_size != model.vocab_size:
        raise CheckpointError("checkpoint vocabulary size differs from the model's")
    _assign(model, params)


def _assign(model, params):
    named = model.named_parameters()
    if set(named) != set(params):
        missing = sorted(set(named) ^ set(params))
        raise CheckpointError(f"parameter names do not line up: {missing[:4]}...")
    for name, p in named.items():
        if p.data.shape != params[name].shape:
            raise CheckpointError(f"shape mismatch for {name}")
        p.data = params[name].astype(np.float64)


# -- the loop ------------------------------------------------------------------


def train(train_reports, val_reports, vocab, config, out_dir=None,
          max_len=None, quiet=True):
    """Fit a summarizer; returns (model, TrainLog).

    If ``out_dir`` is given, writes best.ckpt / last.ckpt / trainlog.jsonl
    plus a train_meta.json with wall-clock time.
    """
    from .inference_eval import generate, rouge_n

    started = time.time()
    rng = np.random.default_rng(config.seed)
    model = Summarizer(config, len(vocab), rng=rng)
    opt = Adam(model.parameters(), lr=config.lr)
    train_prep = [prepare_example(r, vocab, config) for r in train_reports]
    val_prep = [prepare_example(r, vocab, config) for r in val_reports]
    if max_len is None:
        max_len = config.max_gen_len

    log_out = TrainLog(model.config_hash())
    best_score = None
    best_epoch = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_prep))
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [train_prep[i] for i in order[start:start + config.batch_size]]
            total = None
            for prep in batch:
                loss = example_loss(model, prep, training=True, rng=rng)
                epoch_losses.append(loss.item())
                scaled = loss * (1.0 / len(batch))
                total = scaled if total is None else total + scaled
            total.backward()
            clip_grad_norm(model.parameters(), config.grad_clip)
            opt.step()
            opt.zero_grad()
        mean_loss = float(np.mean(epoch_losses))

        val_r1 = None
        if val_prep and epoch % config.val_every == 0:
            scores = []
            for prep in val_prep:
                hyp = generate(model, vocab, prep, max_len=max_len, mode="greedy")
                scores.append(rouge_n(list(prep.reference_tokens), hyp, 1)[2])
            val_r1 = float(np.mean(scores))
            if best_score is None or val_r1 > best_score:
                best_score, best_epoch = val_r1, epoch
                if out_dir:
                    save_checkpoint(os.path.join(out_dir, "best.ckpt"), model, opt)
        log_out.append(epoch, mean_loss, val_r1)
        if not quiet:
            msg = f"epoch {epoch}: loss {mean_loss:.4f}"
            if val_r1 is not None:
                msg += f"  val R1 {val_r1:.4f}"
            print(msg)

    if out_dir:
        save_checkpoint(os.path.join(out_dir, "last.ckpt"), model, opt)
        if best_score is None:
            save_checkpoint(os.path.join(out_dir, "best.ckpt"), model, opt)
        log_out.save(os.path.join(out_dir, "trainlog.jsonl"))
        meta = {"wall_time_s": time.time() - started,
                "best_epoch": best_epoch, "best_val_rouge1": best_score}
        with open(os.path.join(out_dir, "train_meta.json"), "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
    return model, log_out
