import json

import pytest

from affectkit_adapter.export import AdapterConfig, AdapterError, export_embeddings
from affectkit_adapter.io import FormatError, read_corpus


def read_jsonl(path):
    lines = path.read_text().strip().splitlines()
    return json.loads(lines[0]), [json.loads(line) for line in lines[1:]]


class TestExport:
    def test_ten_sentences_give_ten_vectors(self, tiny_encoder_dir, tiny_corpus, tmp_path):
        out = tmp_path / "emb.jsonl"
        count = export_embeddings(tiny_corpus, out, AdapterConfig(model=tiny_encoder_dir))
        assert count == 10
        header, rows = read_jsonl(out)
        assert header == {"dim": 32}
        assert len(rows) == 10
        assert all(len(row["vector"]) == 32 for row in rows)
        assert [row["id"] for row in rows] == list(range(10))

    def test_double_export_is_byte_identical(self, tiny_encoder_dir, tiny_corpus, tmp_path):
        config = AdapterConfig(model=tiny_encoder_dir)
        out_a = tmp_path / "a.jsonl"
        out_b = tmp_path / "b.jsonl"
        export_embeddings(tiny_corpus, out_a, config)
        export_embeddings(tiny_corpus, out_b, config)
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_empty_corpus_gives_header_only(self, tiny_encoder_dir, tmp_path):
        corpus = tmp_path / "empty.jsonl"
        corpus.write_text("")
        out = tmp_path / "emb.jsonl"
        count = export_embeddings(corpus, out, AdapterConfig(model=tiny_encoder_dir))
        assert count == 0
        assert out.read_text() == '{"dim":32}\n'

    def test_mean_pooling_differs_from_cls(self, tiny_encoder_dir, tiny_corpus, tmp_path):
        out_cls = tmp_path / "cls.jsonl"
        out_mean = tmp_path / "mean.jsonl"
        export_embeddings(tiny_corpus, out_cls, AdapterConfig(model=tiny_encoder_dir))
        export_embeddings(
            tiny_corpus, out_mean, AdapterConfig(model=tiny_encoder_dir, pooling="mean")
        )
        assert out_cls.read_bytes() != out_mean.read_bytes()

    def test_missing_model_is_actionable(self, tiny_corpus, tmp_path):
        with pytest.raises(AdapterError, match="download"):
            export_embeddings(
                tiny_corpus, tmp_path / "x.jsonl",
                AdapterConfig(model="no-such-model-anywhere"),
            )

    def test_id_collision_rejected(self, tmp_path):
        corpus = tmp_path / "dup.jsonl"
        corpus.write_text(
            '{"id": 1, "sentence": "a"}\n{"id": 1, "sentence": "b"}\n'
        )
        with pytest.raises(FormatError, match="duplicate"):
            read_corpus(corpus)

    def test_bad_pooling_rejected(self):
        with pytest.raises(AdapterError):
            AdapterConfig(pooling="max")


class TestCli:
    def test_export_command(self, tiny_encoder_dir, tiny_corpus, tmp_path, capsys):
        from affectkit_adapter.cli import main

        out = tmp_path / "emb.jsonl"
        code = main([
            "export", "--corpus", str(tiny_corpus), "--out", str(out),
            "--model", tiny_encoder_dir,
        ])
        assert code == 0
        assert "exported 10 vectors" in capsys.readouterr().out

    def test_usage_error(self, capsys):
        from affectkit_adapter.cli import main

        assert main(["export", "--nope"]) == 1
