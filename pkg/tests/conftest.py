from hypothesis import settings

settings.register_profile("exact", max_examples=40, deadline=None)
settings.load_profile("exact")
