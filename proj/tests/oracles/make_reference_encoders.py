#!/usr/bin/env python3
# Copyright (c) 2026, emostress authors
# SPDX-License-Identifier: Apache-2.0
"""Builds tiny BERT- and RoBERTa-style encoder assets plus reference outputs.

The C++ tokenizers and transformer forward pass are checked against these
files. Everything is created offline from random weights and a small
training corpus, then the HuggingFace implementations produce the expected
token ids and pooled outputs (float64).

Usage: python3 make_reference_encoders.py <fixtures-dir>
"""
import json
import os
import sys

import torch
from safetensors.torch import save_file
from tokenizers import ByteLevelBPETokenizer, BertWordPieceTokenizer
from transformers import (BertConfig, BertModel, BertTokenizer, RobertaConfig,
                          RobertaModel, RobertaTokenizer)

CORPUS = [
    "I can't sleep because of the exams and my rent is due tomorrow.",
    "We went hiking today and the weather was beautiful!",
    "My family doesn't accept me and I'm scared to go home.",
    "Thanks so much, this made my day :)",
    "Honestly I'm so angry at my landlord right now.",
    "I don't know what to do anymore, everything feels heavy.",
    "The café served crème brûlée and naïve jokes.",
    "Running 5k in 25 minutes is my goal for 2024.",
    "Work has been stressful, deadlines everywhere, no time to breathe.",
    "What a surprise! I never expected that gift.",
    "Disgusting behaviour from the people at the party.",
    "I feel calm and relaxed after the weekend.",
] * 4

PROBES = [
    "",
    "hello world",
    "I can't sleep because of the exams!",
    "The café served crème brûlée.",
    "  multiple   spaces\tand\nnewlines  ",
    "Unseen wordz like xylophonequartz appear",
    "Emoji 😀 and symbols #$%&",
    "中文字符 mixed with text",
    "Numbers 12345 and 3.14 and 2024",
    "I'm sure they'll say we've done it, you'd agree",
    "stress " * 80,
]

BATCH = [
    "I can't sleep because of the exams and my rent is due tomorrow.",
    "Thanks so much!",
    "We went hiking today.",
]


def dump_tokens(tok, texts, max_len):
    rows = []
    for t in texts:
        full = tok(t, add_special_tokens=True)["input_ids"]
        trunc = tok(t, add_special_tokens=True, truncation=True, max_length=max_len)["input_ids"]
        rows.append({"text": t, "ids": full, "ids_truncated": trunc})
    return rows


def pooled(model, tok, texts):
    enc = tok(texts, padding=True, return_tensors="pt")
    with torch.no_grad():
        out = model(input_ids=enc["input_ids"], attention_mask=enc["attention_mask"])
    return out.pooler_output.double().tolist(), out.last_hidden_state[:, 0, :].double().tolist()


def save_model(model, path):
    state = {k: v.detach().float().contiguous() for k, v in model.state_dict().items()
             if not k.endswith("position_ids") and not k.endswith("token_type_ids")}
    save_file(state, os.path.join(path, "model.safetensors"))


def make_bert(root):
    path = os.path.join(root, "hf_bert_tiny")
    os.makedirs(path, exist_ok=True)
    wp = BertWordPieceTokenizer(lowercase=True, strip_accents=True)
    wp.train_from_iterator(CORPUS, vocab_size=180, min_frequency=1)
    wp.save_model(path)
    tok = BertTokenizer(os.path.join(path, "vocab.txt"), do_lower_case=True)
    cfg = BertConfig(vocab_size=len(tok.vocab), hidden_size=16, num_hidden_layers=2,
                     num_attention_heads=2, intermediate_size=32, max_position_embeddings=64,
                     type_vocab_size=2, hidden_act="gelu")
    torch.manual_seed(7)
    model = BertModel(cfg)
    # Non-trivial layer norm parameters so those code paths are exercised.
    with torch.no_grad():
        for name, p in model.named_parameters():
            if "LayerNorm" in name:
                p.add_(0.1 * torch.randn_like(p))
    model.eval()
    save_model(model, path)
    with open(os.path.join(path, "config.json"), "w") as f:
        f.write(cfg.to_json_string())
    model = model.float()
    reloaded = BertModel(cfg)
    from safetensors.torch import load_file
    sd = load_file(os.path.join(path, "model.safetensors"))
    reloaded.load_state_dict(sd, strict=False)
    reloaded = reloaded.double().eval()
    pooled_out, cls_hidden = pooled(reloaded, tok, BATCH)
    expected = {
        "family": "bert",
        "max_len": 16,
        "tokens": dump_tokens(tok, PROBES, 16),
        "batch": BATCH,
        "pooled": pooled_out,
        "cls_hidden": cls_hidden,
        "param_count": sum(p.numel() for p in reloaded.parameters()),
    }
    with open(os.path.join(path, "expected.json"), "w") as f:
        json.dump(expected, f, indent=1, ensure_ascii=False)


def make_roberta(root):
    path = os.path.join(root, "hf_roberta_tiny")
    os.makedirs(path, exist_ok=True)
    bpe = ByteLevelBPETokenizer()
    bpe.train_from_iterator(CORPUS, vocab_size=400, min_frequency=1,
                            special_tokens=["<s>", "<pad>", "</s>", "<unk>", "<mask>"])
    bpe.save_model(path)
    tok = RobertaTokenizer(os.path.join(path, "vocab.json"), os.path.join(path, "merges.txt"))
    cfg = RobertaConfig(vocab_size=len(tok.get_vocab()), hidden_size=16, num_hidden_layers=2,
                        num_attention_heads=4, intermediate_size=24, max_position_embeddings=66,
                        type_vocab_size=1, pad_token_id=1, bos_token_id=0, eos_token_id=2,
                        layer_norm_eps=1e-5)
    torch.manual_seed(11)
    model = RobertaModel(cfg)
    with torch.no_grad():
        for name, p in model.named_parameters():
            if "LayerNorm" in name:
                p.add_(0.1 * torch.randn_like(p))
    model.eval()
    save_model(model, path)
    with open(os.path.join(path, "config.json"), "w") as f:
        f.write(cfg.to_json_string())
    reloaded = RobertaModel(cfg)
    from safetensors.torch import load_file
    reloaded.load_state_dict(load_file(os.path.join(path, "model.safetensors")), strict=False)
    reloaded = reloaded.double().eval()
    pooled_out, cls_hidden = pooled(reloaded, tok, BATCH)
    expected = {
        "family": "roberta",
        "max_len": 16,
        "tokens": dump_tokens(tok, PROBES, 16),
        "batch": BATCH,
        "pooled": pooled_out,
        "cls_hidden": cls_hidden,
        "param_count": sum(p.numel() for p in reloaded.parameters()),
    }
    with open(os.path.join(path, "expected.json"), "w") as f:
        json.dump(expected, f, indent=1, ensure_ascii=False)


if __name__ == "__main__":
    root = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "fixtures")
    make_bert(root)
    make_roberta(root)
