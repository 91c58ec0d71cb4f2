"""Test suite for System Doc RAG."""
