import asyncio

import httpx
import numpy as np
import pytest

from stgridpool.service import create_app


def random_tokens(rng, n, h, w, d, scale=1.0):
    return (scale * rng.normal(size=(n, h, w, d))).astype(np.float32)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def service_post():
    """POST against the app over an in-process ASGI transport."""
    app = create_app()

    def post(path: str, payload: dict) -> httpx.Response:
        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://testserver", timeout=120.0
            ) as client:
                return await client.post(path, json=payload)

        return asyncio.run(go())

    return post
