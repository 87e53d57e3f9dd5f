"""Extractive reader served over HTTP for the `remote:` / `http://` backend.

POST /extract {"question", "context"} -> {"answer", "start", "end", "score"}
Offsets are Python string indices, i.e. code points over the request context.

    python tools/reader_server.py --model <checkpoint dir or hub id> --port 8080
"""

import argparse
import threading

import torch
import uvicorn
from fastapi import FastAPI
from pydantic import BaseModel
from transformers import AutoModelForQuestionAnswering, AutoTokenizer


class ExtractRequest(BaseModel):
    question: str
    context: str


class SpanExtractor:
    def __init__(self, model: str, max_seq_len: int, doc_stride: int, max_answer_tokens: int):
        self.tokenizer = AutoTokenizer.from_pretrained(model, use_fast=True)
        self.model = AutoModelForQuestionAnswering.from_pretrained(model).eval()
        self.max_seq_len = max_seq_len
        self.doc_stride = doc_stride
        self.max_answer_tokens = max_answer_tokens
        self.lock = threading.Lock()

    def __call__(self, question: str, context: str) -> dict:
        enc = self.tokenizer(question, context, truncation="only_second",
                             max_length=self.max_seq_len, stride=self.doc_stride,
                             return_overflowing_tokens=True, return_offsets_mapping=True,
                             padding=True, return_tensors="pt")
        offsets = enc.pop("offset_mapping")
        enc.pop("overflow_to_sample_mapping", None)
        with self.lock, torch.no_grad():
            out = self.model(**enc)
        best = None
        for w in range(offsets.shape[0]):
            seq_ids = enc.sequence_ids(w)
            ctx = [i for i, s in enumerate(seq_ids) if s == 1]
            start_lp = torch.log_softmax(out.start_logits[w], -1)
            end_lp = torch.log_softmax(out.end_logits[w], -1)
            for i in ctx:
                for j in ctx:
                    if j < i or j - i >= self.max_answer_tokens:
                        continue
                    score = float(start_lp[i] + end_lp[j])
                    if best is None or score > best[0]:
                        best = (score, int(offsets[w, i, 0]), int(offsets[w, j, 1]))
        if best is None:
            return {"answer": "", "start": 0, "end": 0, "score": 0.0}
        score, start, end = best
        return {"answer": context[start:end], "start": start, "end": end,
                "score": float(torch.tensor(score).exp())}


def make_app(extractor: SpanExtractor) -> FastAPI:
    app = FastAPI()

    @app.post("/extract")
    def extract(req: ExtractRequest):
        return extractor(req.question, req.context)

    return app


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--model", required=True)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--max-seq-len", type=int, default=384)
    parser.add_argument("--doc-stride", type=int, default=50)
    parser.add_argument("--max-answer-tokens", type=int, default=30)
    args = parser.parse_args()
    extractor = SpanExtractor(args.model, args.max_seq_len, args.doc_stride,
                              args.max_answer_tokens)
    uvicorn.run(make_app(extractor), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
