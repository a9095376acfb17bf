import json

import pytest
import torch


@pytest.fixture(scope="session")
def tiny_encoder_dir(tmp_path_factory):
    """A local 2-layer encoder directory so tests never touch the network."""
    from transformers import BertConfig, BertModel, BertTokenizerFast

    directory = tmp_path_factory.mktemp("tiny-encoder")
    words = [
        "happy", "sad", "bossy", "calm",
        "employee", "employer", "judge", "friend", "stranger",
        "greet", "ask", "fight", "help", "tease",
    ]
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + words
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(vocab))
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file), do_lower_case=True)
    tokenizer.save_pretrained(directory)

    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(directory)
    return str(directory)


@pytest.fixture
def tiny_corpus(tmp_path):
    """Ten MABMO-shaped sentences with 15-dim targets and split tags."""
    sentences = [
        "Happy employee greet bossy employer",
        "Sad judge fight calm friend",
        "Calm friend help happy stranger",
        "Bossy employer ask sad employee",
        "Happy judge greet calm stranger",
        "Sad stranger tease bossy judge",
        "Calm employee help happy friend",
        "Happy friend ask sad judge",
        "Bossy stranger fight calm employee",
        "Sad employer tease happy judge",
    ]
    path = tmp_path / "corpus.jsonl"
    with path.open("w") as fh:
        for i, sentence in enumerate(sentences):
            fh.write(
                json.dumps(
                    {
                        "id": i,
                        "sentence": sentence,
                        "targets": [((i * 7 + k * 3) % 17 - 8) / 4.0 for k in range(15)],
                        "split": "train" if i < 8 else "test",
                    }
                )
                + "\n"
            )
    return path
