"""Patch geometry"""
