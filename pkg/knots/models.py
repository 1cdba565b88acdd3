from django.db import models


class Knot(models.Model):
    """A knot table entry: Seifert matrix and, when known, a PD code."""

    name = models.CharField(max_length=64, unique=True)
    seifert = models.JSONField(default=list)
    pd = models.JSONField(null=True, blank=True)
    source = models.CharField(max_length=255, blank=True, default='')
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['name']

    def __str__(self):
        return self.name

    @property
    def genus(self):
        return len(self.seifert) // 2


class Report(models.Model):
    """A stored obstruction report for the ordered pair J >= K."""

    VERDICT_CHOICES = [
        ('Obstructed', 'Obstructed'),
        ('NotObstructed', 'Not obstructed'),
        ('Inconclusive', 'Inconclusive'),
    ]

    j_name = models.CharField(max_length=64)
    k_name = models.CharField(max_length=64)
    aggregate = models.CharField(max_length=20, choices=VERDICT_CHOICES)
    tests = models.JSONField(default=list)
    payload = models.JSONField(default=dict)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.j_name} >= {self.k_name} - {self.aggregate}"
