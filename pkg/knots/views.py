from django.http import JsonResponse
from django.shortcuts import get_object_or_404
from django.views.decorators.http import require_GET

from .models import Knot, Report
from . import services


@require_GET
def knot_list(request):
    """All stored knots with their table source."""
    knots = [
        {'name': knot.name, 'genus': knot.genus, 'has_pd': knot.pd is not None, 'source': knot.source}
        for knot in Knot.objects.all()
    ]
    return JsonResponse({'knots': knots})


@require_GET
def knot_detail(request, name):
    """Classical invariants of one stored knot."""
    knot = get_object_or_404(Knot, name=name)
    return JsonResponse(services.invariants(services.record_from_knot(knot)))


@require_GET
def report_detail(request, pk):
    """A stored report payload."""
    report = get_object_or_404(Report, pk=pk)
    return JsonResponse(report.payload)
