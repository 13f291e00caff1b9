"""Serve an n-gram attribute model over HTTP and combine it with a local base.

The remote model goes through the same logits protocol a hosted language
model would use; the combined output matches the all-local run exactly.
"""
from palette import AttributeSpec, Palette, PaletteConfig, RemoteLogitClient, desk
from palette.decode import SamplerConfig, generate
from palette.providers import make_logit_server, serve_in_thread

models = desk.train_models(seed=0)
server = make_logit_server(models["positive"])
serve_in_thread(server)
host, port = server.server_address
remote = RemoteLogitClient(f"http://{host}:{port}", models["base"].vocab)

sampler = SamplerConfig(kind="top_p", p=0.9, seed=7)
outputs = {}
for where, attr in (("local", models["positive"]), ("remote", remote)):
    cfg = PaletteConfig(models["base"], [AttributeSpec("positive", attr, 1.5)])
    outputs[where] = generate(Palette(cfg), desk.SENTIMENT_PROMPT, 12, sampler).text
    print(f"{where:>6}: {outputs[where]}")
server.shutdown()
print("identical:", outputs["local"] == outputs["remote"])
