from django.contrib import admin
from .models import Knot, Report


@admin.register(Knot)
class KnotAdmin(admin.ModelAdmin):
    list_display = ('name', 'genus', 'source', 'created_at')
    list_filter = ('source',)
    search_fields = ('name',)
    readonly_fields = ('created_at',)


@admin.register(Report)
class ReportAdmin(admin.ModelAdmin):
    list_display = ('id', 'j_name', 'k_name', 'aggregate', 'created_at')
    list_filter = ('aggregate', 'created_at')
    search_fields = ('j_name', 'k_name')
    readonly_fields = ('created_at', 'updated_at')
