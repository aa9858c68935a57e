import json
import subprocess
import sys
import tempfile

import jsonschema

cli, schema_path, data = sys.argv[1:4]
schema = json.load(open(schema_path))
model = tempfile.NamedTemporaryFile(suffix=".json", delete=False).name
subprocess.run([cli, "train", "--config", f"{data}/toy/toy_train.conf",
                "--pairs", f"{data}/toy/toy_pairs.tsv", "--vectors", f"{data}/toy/toy_vectors.txt",
                "--out", model], capture_output=True, check=True)
stack = ["--model", model, "--graph", f"{data}/graph.jsonl", "--dictionary", f"{data}/dictionary.txt",
         "--qa", f"{data}/qa.jsonl", "--vectors", f"{data}/toy/toy_vectors.txt"]
questions = ["What are the symptoms of cold?", "What causes diabetes?", "zzz qqq", "",
             "Does weed give you lung cancer?", "what should i avoid to prevent flu"]
seen = set()
for q in questions:
    for extra in ([], ["--no-kg"]):
        out = subprocess.run([cli, "query", "--json", *stack, *extra, q],
                             capture_output=True, text=True, check=True).stdout
        doc = json.loads(out.strip().splitlines()[-1])
        jsonschema.validate(doc, schema)
        print(f"ok {doc['source']:4} {q!r}")
        seen.add(doc["source"])
if seen != {"kg", "qa", "none"}:
    sys.exit(f"sources covered: {sorted(seen)}")
